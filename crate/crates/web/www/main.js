import init, { simplexTrajectory, classifyRps, leadLagCurve, leadLagClass } from "./pkg/evodyn_web.js";

const LABELS = {
  StrictlyPassive: "strictly passive",
  Lossless: "lossless",
  NonPassive: "non-passive",
  Indefinite: "indefinite",
  PassiveAndNi: "passive and negative imaginary",
  NiOnly: "negative imaginary only",
};

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

const SIDE = 400;
const PAD = 30;
const H = (Math.sqrt(3) / 2) * SIDE;
const toPx = (u, v) => [PAD + u * SIDE, PAD + H - v * SIDE];
let x0 = [0.5, 0.25, 0.25];

function fromPx(px, py) {
  const u = (px - PAD) / SIDE;
  const v = (PAD + H - py) / SIDE;
  const x3 = (2 * v) / Math.sqrt(3);
  const x2 = u - x3 / 2;
  return [1 - x2 - x3, x2, x3];
}

function drawSimplex() {
  const ctx = $("simplex").getContext("2d");
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  ctx.moveTo(...toPx(0, 0));
  ctx.lineTo(...toPx(1, 0));
  ctx.lineTo(...toPx(0.5, Math.sqrt(3) / 2));
  ctx.closePath();
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.fillText("R", ...toPx(-0.04, -0.04));
  ctx.fillText("P", ...toPx(1.02, -0.04));
  ctx.fillText("S", ...toPx(0.49, Math.sqrt(3) / 2 + 0.02));
  $("sim-error").textContent = "";
  try {
    $("game-class").textContent = LABELS[classifyRps(num("w"), num("l"))];
    const path = simplexTrajectory(num("w"), num("l"), new Float64Array(x0), $("dynamics").value, num("pa"), num("pb"), num("horizon"));
    ctx.strokeStyle = "#1f5fa8";
    ctx.beginPath();
    for (let k = 0; k < path.length; k += 2) {
      const [px, py] = toPx(path[k], path[k + 1]);
      k === 0 ? ctx.moveTo(px, py) : ctx.lineTo(px, py);
    }
    ctx.stroke();
    ctx.fillStyle = "#c33";
    const [sx, sy] = toPx(path[0], path[1]);
    ctx.fillRect(sx - 3, sy - 3, 6, 6);
  } catch (e) {
    $("sim-error").textContent = String(e.message ?? e);
  }
}

function drawFrequency() {
  const ctx = $("freq").getContext("2d");
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  $("ll-error").textContent = "";
  try {
    const alpha = num("alpha");
    const beta = num("beta");
    $("ll-class").textContent = LABELS[leadLagClass(alpha, beta)];
    const c = leadLagCurve(alpha, beta, 400);
    // Signed log scale keeps both parts readable across decades.
    const slog = (y) => Math.sign(y) * Math.log10(1 + Math.abs(y));
    let lo = 0;
    let hi = 0;
    for (let k = 0; k < c.length; k += 3) {
      lo = Math.min(lo, slog(c[k + 1]), slog(c[k + 2]));
      hi = Math.max(hi, slog(c[k + 1]), slog(c[k + 2]));
    }
    const px = (w) => 40 + ((Math.log10(w) + 2) / 4) * (width - 60);
    const py = (y) => 10 + ((hi - slog(y)) / (hi - lo || 1)) * (height - 40);
    ctx.strokeStyle = "#bbb";
    ctx.beginPath();
    ctx.moveTo(40, py(0));
    ctx.lineTo(width - 20, py(0));
    ctx.stroke();
    for (const [offset, color, label] of [[1, "#1f5fa8", "Re G(jw)"], [2, "#c0392b", "Im G(jw)"]]) {
      ctx.strokeStyle = color;
      ctx.beginPath();
      for (let k = 0; k < c.length; k += 3) {
        k === 0 ? ctx.moveTo(px(c[k]), py(c[k + offset])) : ctx.lineTo(px(c[k]), py(c[k + offset]));
      }
      ctx.stroke();
      ctx.fillStyle = color;
      ctx.fillText(label, width - 90, offset * 14);
    }
    ctx.fillStyle = "#444";
    for (const w of [0.01, 0.1, 1, 10, 100]) ctx.fillText(String(w), px(w) - 8, height - 8);
  } catch (e) {
    $("ll-error").textContent = String(e.message ?? e);
  }
}

await init();
for (const id of ["w", "l", "dynamics", "pa", "pb", "horizon"]) $(id).addEventListener("change", drawSimplex);
for (const id of ["alpha", "beta"]) $(id).addEventListener("change", drawFrequency);
$("simplex").addEventListener("click", (ev) => {
  const r = ev.target.getBoundingClientRect();
  const x = fromPx(ev.clientX - r.left, ev.clientY - r.top);
  if (x.every((v) => v > 0)) {
    x0 = x;
    drawSimplex();
  }
});
drawSimplex();
drawFrequency();
