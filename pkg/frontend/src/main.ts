import { getRun, getTrajectory, listRuns, subscribeStatus } from "./api.js";
import { submitFeedback, canSubmit } from "./feedback.js";
import { Playback, drawScene } from "./playback.js";
import { applyStatusEvent, badgeClass, sortRuns } from "./runs.js";
import type { RunRecord, RunSummary, Verdict } from "./types.js";

const app = document.getElementById("app")!;
const banner = document.getElementById("banner")!;

let runs: RunSummary[] = [];
let playback: Playback | null = null;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, className = "", text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

// ------------------------------------------------------------- run list

function renderRunList(): void {
  app.replaceChildren();
  const list = el("div", "run-list");
  if (runs.length === 0) {
    list.appendChild(el("p", "empty", "No runs yet — start one with the CLI."));
  }
  for (const run of runs) {
    const row = el("div", "run-row");
    row.dataset.runId = run.run_id;
    const badge = el("span", `badge ${badgeClass(run.status)}`, run.status);
    row.appendChild(badge);
    const link = el("a", "", `${run.run_id} — ${run.env_id}`);
    link.href = `#/run/${run.run_id}`;
    row.appendChild(link);
    if (run.awaiting_candidate_id) {
      row.appendChild(el("span", "awaiting-note",
        `awaiting feedback on ${run.awaiting_candidate_id}`));
    }
    list.appendChild(row);
  }
  app.appendChild(list);
}

// ------------------------------------------------------------- run view

async function renderRun(runId: string): Promise<void> {
  const record = await getRun(runId);
  app.replaceChildren();
  const back = el("a", "back", "← runs");
  back.href = "#/";
  app.appendChild(back);
  app.appendChild(el("h2", "", record.run_id));
  app.appendChild(el("p", "", `status: ${record.status}`
    + (record.baseline
      ? ` — baseline success rate ${record.baseline.success_rate.toFixed(2)}`
      : "")));

  const table = el("div", "candidates");
  for (const cand of record.candidates) {
    const row = el("div", "candidate-row");
    const rate = cand.success_rate === null
      ? "—" : cand.success_rate.toFixed(2);
    row.appendChild(el("span", "", `${cand.id} (gen ${cand.generation})`));
    row.appendChild(el("span", `verdict verdict-${cand.verdict}`, cand.verdict));
    row.appendChild(el("span", "", `success ${rate}`));
    const watch = el("button", "", "watch episode 0");
    const k = Number(cand.id.split("_")[1]);
    watch.onclick = () => void renderPlayer(record, k, 0);
    row.appendChild(watch);
    table.appendChild(row);
  }
  app.appendChild(table);

  if (record.status === "awaiting_feedback"
    && record.awaiting_candidate_id !== null) {
    app.appendChild(feedbackForm(record));
  }
}

// ------------------------------------------------------------- playback

async function renderPlayer(
  record: RunRecord, candidate: number, episode: number,
): Promise<void> {
  playback?.pause();
  const host = document.getElementById("player") ?? el("div");
  host.id = "player";
  host.replaceChildren();
  app.appendChild(host);
  let trajectory;
  try {
    trajectory = await getTrajectory(record.run_id, candidate, episode);
  } catch (err) {
    host.appendChild(el("p", "error", String(err)));
    return;
  }

  const canvas = el("canvas");
  canvas.width = 480;
  canvas.height = 320;
  host.appendChild(canvas);
  const overlay = el("div", "overlay");
  host.appendChild(overlay);

  const scrub = el("input") as HTMLInputElement;
  scrub.type = "range";
  scrub.min = "0";
  scrub.max = String(trajectory.scenes.length - 1);
  scrub.value = "0";
  host.appendChild(scrub);

  const playBtn = el("button", "", "play");
  host.appendChild(playBtn);

  playback = new Playback(trajectory);
  let ctx: CanvasRenderingContext2D | null = null;
  try {
    ctx = canvas.getContext("2d");
  } catch {
    ctx = null; // headless test environments have no 2D context
  }
  playback.onFrame((view) => {
    if (ctx) drawScene(ctx, view.scene, canvas.width, canvas.height);
    scrub.value = String(view.index);
    overlay.textContent =
      `step ${view.index + 1}/${playback!.frameCount}`
      + ` — custom ${view.cumulativeCustom.toFixed(2)}`
      + ` — legacy ${view.cumulativeLegacy.toFixed(0)}`
      + (view.isLast ? ` — ${trajectory.cause}` : "");
  });
  scrub.oninput = () => {
    playback?.pause();
    playback?.seek(Number(scrub.value));
  };
  playBtn.onclick = () => {
    if (playback?.isPlaying) playback.pause();
    else playback?.play();
  };
  playback.seek(0);
}

// ------------------------------------------------------------- feedback

function feedbackForm(record: RunRecord): HTMLElement {
  const candidateId = record.awaiting_candidate_id!;
  const k = Number(candidateId.split("_")[1]);
  const form = el("div", "feedback-form");
  form.appendChild(el("h3", "", `Feedback for ${candidateId}`));
  const text = el("textarea") as HTMLTextAreaElement;
  text.placeholder = "Describe what the agent should do differently…";
  form.appendChild(text);
  const verdictSel = el("select") as HTMLSelectElement;
  for (const v of ["revise", "accept", "reject"]) {
    const opt = el("option", "", v) as HTMLOptionElement;
    opt.value = v;
    verdictSel.appendChild(opt);
  }
  form.appendChild(verdictSel);
  const submit = el("button", "submit", "submit") as HTMLButtonElement;
  form.appendChild(submit);
  const note = el("p", "note");
  form.appendChild(note);

  const refresh = () => {
    submit.disabled = !canSubmit(text.value, verdictSel.value as Verdict);
  };
  text.oninput = refresh;
  verdictSel.onchange = refresh;
  refresh();

  submit.onclick = async () => {
    submit.disabled = true;
    const result = await submitFeedback(
      record.run_id, k, text.value, verdictSel.value as Verdict);
    note.textContent = result.message;
    if (result.ok) await renderRun(record.run_id);
    else refresh();
  };
  return form;
}

// -------------------------------------------------------------- routing

async function route(): Promise<void> {
  const hash = window.location.hash;
  const match = hash.match(/^#\/run\/(.+)$/);
  if (match) {
    await renderRun(match[1]);
  } else {
    runs = sortRuns(await listRuns());
    renderRunList();
  }
}

window.addEventListener("hashchange", () => void route());

subscribeStatus(
  (ev) => {
    runs = applyStatusEvent(runs, ev);
    if (!window.location.hash.startsWith("#/run/")) renderRunList();
  },
  (up) => {
    banner.textContent = up ? "" : "connection lost — retrying…";
    banner.style.display = up ? "none" : "block";
  },
);

void route();
