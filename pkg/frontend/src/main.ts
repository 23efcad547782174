import { ApiClient, ApiError } from "./api.js";
import { buildChart, renderChartSvg } from "./chart.js";
import {
  ConsoleState,
  DealInputs,
  initialState,
  recordAccepted,
  recordEvaluation,
  withMeta,
  withSurface,
} from "./state.js";
import { parseFractions, validateInputs } from "./validate.js";

const api = new ApiClient("");
let state: ConsoleState = initialState();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function num(id: string): number {
  return Number(el<HTMLInputElement>(id).value);
}

function fmtPct(x: number | null | undefined): string {
  return x === null || x === undefined ? "–" : `${(100 * x).toFixed(2)}%`;
}

function fmtMoney(x: number | null | undefined): string {
  return x === null || x === undefined ? "–" : `$${x.toFixed(1)}M`;
}

function showError(message: string | null): void {
  const box = el("error-box");
  box.textContent = message ?? "";
  box.style.display = message ? "block" : "none";
}

function currentInputs(): DealInputs {
  return { f: num("input-f"), t: num("input-t"), size: num("input-size"), irr: num("input-irr") / 100 };
}

function renderMeta(): void {
  if (!state.meta) return;
  const m = state.meta;
  el("meta-line").textContent =
    `fund $${m.fund_size}M · horizon ${m.horizon_years}y · hurdle ${fmtPct(m.hurdle_irr)} ` +
    `· exits after ${m.exit_years}y`;
  const f = el<HTMLInputElement>("input-f");
  f.max = String(m.fund_size);
  const t = el<HTMLInputElement>("input-t");
  t.max = String(m.horizon_years);
}

function renderDecision(): void {
  const panel = el("decision-panel");
  const d = state.lastDecision;
  const inputs = state.lastInputs;
  if (!d || !inputs) {
    panel.innerHTML = "<p class='muted'>Evaluate a deal to see the verdict.</p>";
    return;
  }
  const verdictClass = d.verdict === "accept" ? "accept" : d.verdict === "reject" ? "reject" : "unaffordable";
  const gap = d.threshold_irr === null ? null : inputs.irr - d.threshold_irr;
  panel.innerHTML = `
    <div class="verdict ${verdictClass}">${d.verdict.toUpperCase()}</div>
    <table class="kv">
      <tr><td>offered IRR</td><td>${fmtPct(inputs.irr)}</td></tr>
      <tr><td>required IRR</td><td>${fmtPct(d.threshold_irr)}</td></tr>
      <tr><td>gap</td><td>${gap === null ? "–" : fmtPct(gap)}</td></tr>
      <tr><td>excess value</td><td>${fmtMoney(d.deal_value_excess)}</td></tr>
    </table>`;
  const button = el<HTMLButtonElement>("record-accepted");
  const last = state.sessionLog[state.sessionLog.length - 1];
  button.disabled = d.verdict !== "accept" || !last || last.recorded;
}

function renderLog(): void {
  const body = el("log-body");
  body.innerHTML = state.sessionLog
    .map(
      (entry) => `
      <tr>
        <td>${entry.seq}</td>
        <td>${fmtMoney(entry.f)}</td>
        <td>${entry.t.toFixed(2)}y</td>
        <td>${fmtMoney(entry.size)}</td>
        <td>${fmtPct(entry.irr)}</td>
        <td class="${entry.verdict}">${entry.verdict}</td>
        <td>${fmtPct(entry.thresholdIrr)}</td>
        <td>${entry.recorded ? "yes" : ""}</td>
      </tr>`,
    )
    .join("");
}

function renderState(): void {
  el<HTMLInputElement>("input-f").value = state.remainingCapital.toFixed(1);
}

async function refreshSurface(): Promise<void> {
  const fractions = parseFractions(el<HTMLInputElement>("surface-fractions").value);
  if (!fractions) {
    showError("surface fractions must be numbers in (0, 1], comma-separated");
    return;
  }
  const rows = await api.surface(fractions, 60);
  state = withSurface(state, rows);
  const chart = buildChart(rows, 720, 320, state.meta?.hurdle_irr ?? null);
  el("surface-chart").innerHTML = renderChartSvg(chart);
}

async function refreshWhatIf(): Promise<void> {
  if (!state.meta) return;
  const raw = el<HTMLInputElement>("whatif-sizes").value;
  const sizes = raw
    .split(",")
    .map((p) => Number(p.trim()))
    .filter((v) => Number.isFinite(v) && v > 0);
  const inputs = currentInputs();
  const after = inputs.f - inputs.size;
  const rows: string[] = [];
  for (const size of sizes) {
    const now = await thresholdOrNull(inputs.f, size, inputs.t);
    const hypothetical = after > 0 ? await thresholdOrNull(after, size, inputs.t) : null;
    rows.push(
      `<tr><td>${fmtMoney(size)}</td><td>${fmtPct(now)}</td><td>${fmtPct(hypothetical)}</td></tr>`,
    );
  }
  el("whatif-body").innerHTML = rows.join("");
  el("whatif-after-label").textContent =
    after > 0 ? `after accepting (${fmtMoney(after)} left)` : "after accepting (unaffordable)";
}

async function thresholdOrNull(f: number, s: number, t: number): Promise<number | null> {
  try {
    const body = await api.threshold(f, s, t);
    return body.threshold_irr;
  } catch (err) {
    if (err instanceof ApiError && err.code === "out_of_domain") return null;
    throw err;
  }
}

async function onEvaluate(): Promise<void> {
  if (!state.meta) return;
  showError(null);
  const inputs = currentInputs();
  const verdictOrErrors = validateInputs(state.meta, inputs);
  if (!verdictOrErrors.ok) {
    showError(Object.values(verdictOrErrors.errors).join("; "));
    return;
  }
  try {
    const decision = await api.decide({
      f: inputs.f,
      t: inputs.t,
      size: inputs.size,
      irr_underwritten: inputs.irr,
    });
    state = recordEvaluation(state, inputs, decision);
    renderDecision();
    renderLog();
    await refreshWhatIf();
  } catch (err) {
    showError(err instanceof Error ? err.message : String(err));
  }
}

function onRecordAccepted(): void {
  state = recordAccepted(state);
  renderState();
  renderDecision();
  renderLog();
  void refreshWhatIf();
}

async function start(): Promise<void> {
  try {
    const meta = await api.meta();
    state = withMeta(state, meta);
    renderMeta();
    renderState();
    renderDecision();
    await refreshSurface();
    await refreshWhatIf();
  } catch (err) {
    showError(
      err instanceof Error
        ? `cannot reach the query service: ${err.message}`
        : String(err),
    );
  }
  el("evaluate").addEventListener("click", () => void onEvaluate());
  el("record-accepted").addEventListener("click", onRecordAccepted);
  el("surface-refresh").addEventListener("click", () => void refreshSurface().catch(
    (err) => showError(err instanceof Error ? err.message : String(err)),
  ));
  el("whatif-refresh").addEventListener("click", () => void refreshWhatIf().catch(
    (err) => showError(err instanceof Error ? err.message : String(err)),
  ));
}

void start();
