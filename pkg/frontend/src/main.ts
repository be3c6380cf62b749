// Boot script: session picker, build progress polling, then the explorer.

import { ExplorerApi } from "./api.js";
import { renderFailure, startExplorer } from "./app.js";
import { el, clear } from "./dom.js";

const POLL_MS = 800;

async function openSession(root: HTMLElement, api: ExplorerApi, id: string): Promise<void> {
  clear(root);
  const progress = el("div", { class: "build-progress" });
  root.appendChild(progress);
  for (;;) {
    const status = await api.status(id);
    if (status.state === "done") break;
    if (status.state === "failed") {
      clear(root);
      const box = el("div", { class: "failure-state" });
      box.appendChild(el("strong", {}, "BuildFailed"));
      box.appendChild(el("span", {}, ` stage ${status.stage}: ${status.reason}`));
      root.appendChild(box);
      return;
    }
    progress.textContent = `session ${id}: ${status.state}` +
      (status.stage ? ` (${status.stage}, done: ${status.stages_done.join(", ") || "none"})` : "");
    await new Promise((r) => setTimeout(r, POLL_MS));
  }
  try {
    await startExplorer(root, api, id);
  } catch {
    // startExplorer already rendered the failure
  }
}

async function showPicker(root: HTMLElement, api: ExplorerApi): Promise<void> {
  clear(root);
  const box = el("div", { class: "session-picker" });
  box.appendChild(el("h2", {}, "sessions"));
  const list = el("div", { class: "session-list" });
  box.appendChild(list);
  try {
    const { sessions } = await api.listSessions();
    if (!sessions.length) list.appendChild(el("div", {}, "no sessions yet"));
    for (const s of sessions) {
      const row = el("button", { class: "session-row" }, `${s.id} [${s.state}]`);
      row.addEventListener("click", () => void openSession(root, api, s.id));
      list.appendChild(row);
    }
  } catch (err) {
    renderFailure(list, err);
  }

  box.appendChild(el("h3", {}, "new session"));
  const form = el("div", { class: "session-form" });
  const input = el("textarea", { rows: "8", placeholder: "session config JSON" });
  form.appendChild(input);
  const submit = el("button", {}, "create");
  const error = el("div", { class: "form-error" });
  submit.addEventListener("click", () => {
    void (async () => {
      error.textContent = "";
      let config: unknown;
      try {
        config = JSON.parse((input as HTMLTextAreaElement).value);
      } catch {
        error.textContent = "config is not valid JSON";
        return;
      }
      try {
        const { id } = await api.createSession(config);
        await openSession(root, api, id);
      } catch (err) {
        error.textContent = String(err);
      }
    })();
  });
  form.appendChild(submit);
  form.appendChild(error);
  box.appendChild(form);
  root.appendChild(box);
}

const appRoot = document.getElementById("app");
if (appRoot) {
  const api = new ExplorerApi("/api");
  void showPicker(appRoot, api);
}
