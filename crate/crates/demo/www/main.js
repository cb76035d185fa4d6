import init, { fit_hemisphere, basis_functions, compare_methods } from "./pkg/wqisa_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function fail(target, err) {
  target.innerHTML = "";
  const p = document.createElement("p");
  p.className = "err";
  p.textContent = String(err.message ?? err);
  target.appendChild(p);
}

// Blue to yellow ramp.
function colour(t) {
  t = Math.min(1, Math.max(0, t));
  const r = Math.round(40 + 215 * t);
  const g = Math.round(60 + 170 * t);
  const b = Math.round(160 - 120 * t);
  return `rgb(${r},${g},${b})`;
}

function drawFit(view) {
  const c = $("fit-canvas");
  const ctx = c.getContext("2d");
  const { nx, ny, x, y, z } = view.grid;
  const lo = Math.min(...z), hi = Math.max(...z);
  const cw = c.width / nx, ch = c.height / ny;
  const sx = (v) => ((v - x[0]) / (x[1] - x[0])) * c.width;
  const sy = (v) => c.height - ((v - y[0]) / (y[1] - y[0])) * c.height;
  ctx.clearRect(0, 0, c.width, c.height);
  for (let i = 0; i < nx; i++) {
    for (let j = 0; j < ny; j++) {
      ctx.fillStyle = colour((z[i * ny + j] - lo) / (hi - lo || 1));
      ctx.fillRect(i * cw, c.height - (j + 1) * ch, cw + 1, ch + 1);
    }
  }
  ctx.strokeStyle = "rgba(0,0,0,0.35)";
  ctx.lineWidth = 1;
  for (const k of new Set(view.knots_x)) {
    ctx.beginPath(); ctx.moveTo(sx(k), 0); ctx.lineTo(sx(k), c.height); ctx.stroke();
  }
  for (const k of new Set(view.knots_y)) {
    ctx.beginPath(); ctx.moveTo(0, sy(k)); ctx.lineTo(c.width, sy(k)); ctx.stroke();
  }
  ctx.fillStyle = "rgba(0,0,0,0.5)";
  const step = Math.max(1, Math.floor(view.cloud.length / 1500));
  for (let i = 0; i < view.cloud.length; i += step) {
    const p = view.cloud[i];
    ctx.fillRect(sx(p[0]) - 1, sy(p[1]) - 1, 2, 2);
  }
}

function runFit() {
  const log = $("fit-log");
  try {
    const view = JSON.parse(fit_hemisphere(num("fit-n"), num("fit-noise"), num("fit-outliers"),
      num("fit-degree"), num("fit-seed"), 96));
    drawFit(view);
    const lines = view.iterations.map((it) =>
      `${String(it.iteration).padStart(2)}  ${it.elements[0]}x${it.elements[1]}`.padEnd(14) +
      `k=${it.weight.k ?? "-"}`.padEnd(7) + `GMSE ${it.gmse.toExponential(3)}`);
    lines.push("", `returned iteration ${view.best_iteration}`, `stop: ${view.stop_reason}`,
      `test MSE ${view.test_mse.toExponential(3)}`);
    log.textContent = lines.join("\n");
  } catch (e) {
    fail(log, e);
  }
}

function runBasis() {
  const c = $("basis-canvas");
  const ctx = c.getContext("2d");
  ctx.clearRect(0, 0, c.width, c.height);
  const knots = $("basis-knots").value.split(/[\s,]+/).filter(Boolean).map(Number);
  let view;
  try {
    view = JSON.parse(basis_functions(num("basis-degree"), new Float64Array(knots), 400));
  } catch (e) {
    ctx.fillStyle = "#b00";
    ctx.fillText(String(e.message ?? e), 10, 20);
    return;
  }
  const pad = 20, w = c.width - 2 * pad, h = c.height - 2 * pad;
  const px = (t) => pad + t * w, py = (v) => pad + (1 - v) * h;
  view.values.forEach((row, i) => {
    ctx.strokeStyle = `hsl(${(i * 47) % 360},65%,45%)`;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    row.forEach((v, s) => (s ? ctx.lineTo(px(view.t[s]), py(v)) : ctx.moveTo(px(view.t[s]), py(v))));
    ctx.stroke();
  });
  ctx.fillStyle = "#000";
  for (const k of view.knots) ctx.fillRect(px(k) - 1, c.height - pad + 2, 2, 8);
  ctx.fillStyle = "#c00";
  for (const a of view.averages) {
    ctx.beginPath(); ctx.arc(px(a), c.height - pad - 3, 3, 0, 2 * Math.PI); ctx.fill();
  }
}

function runCompare() {
  const out = $("cmp-out");
  try {
    const view = JSON.parse(compare_methods(num("cmp-n"), num("cmp-noise"), num("cmp-outliers"), num("cmp-seed")));
    const rows = view.methods.map((m) =>
      `<tr><th>${m.method}</th><td>${m.mesh[0]}x${m.mesh[1]}</td><td>${m.coefficients}</td>` +
      `<td>${m.validation_gmse.toExponential(3)}</td><td>${m.test_mse.toExponential(3)}</td>` +
      `<td>${m.test_max_abs.toExponential(3)}</td></tr>`).join("");
    out.innerHTML = `<table><tr><th>method</th><th>finest mesh</th><th>coefficients</th>` +
      `<th>validation GMSE</th><th>test MSE</th><th>test max |e|</th></tr>${rows}</table>`;
  } catch (e) {
    fail(out, e);
  }
}

await init();
$("fit-run").onclick = runFit;
$("basis-run").onclick = runBasis;
$("cmp-run").onclick = runCompare;
runBasis();
runFit();
