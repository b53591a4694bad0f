import init, { lift_spectrum, deviation_curve, matching_probability } from "./pkg/randlift_demo.js";

const $ = (id) => document.getElementById(id);

function show(id, text, isError = false) {
  const el = $(id);
  el.textContent = text;
  el.className = isError ? "error" : "";
}

function axes(ctx, w, h, pad) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  ctx.moveTo(pad, pad);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad, h - pad);
  ctx.stroke();
}

function drawSpectrum(data) {
  const canvas = $("sp-canvas");
  const ctx = canvas.getContext("2d");
  const [w, h, pad] = [canvas.width, canvas.height, 30];
  axes(ctx, w, h, pad);
  const d = data.d;
  const bins = 80;
  const counts = new Array(bins).fill(0);
  for (const x of data.eigenvalues) {
    const k = Math.min(bins - 1, Math.max(0, Math.floor(((x + d) / (2 * d)) * bins)));
    counts[k] += 1;
  }
  const top = Math.max(...counts, 1);
  const bw = (w - 2 * pad) / bins;
  ctx.fillStyle = "#4a78c2";
  counts.forEach((c, k) => {
    const bh = ((h - 2 * pad) * c) / top;
    ctx.fillRect(pad + k * bw, h - pad - bh, bw - 1, bh);
  });
  const xOf = (x) => pad + ((x + d) / (2 * d)) * (w - 2 * pad);
  ctx.strokeStyle = "#c0392b";
  ctx.setLineDash([6, 4]);
  for (const x of [-data.ramanujan, data.ramanujan]) {
    ctx.beginPath();
    ctx.moveTo(xOf(x), pad);
    ctx.lineTo(xOf(x), h - pad);
    ctx.stroke();
  }
  ctx.setLineDash([]);
  ctx.fillStyle = "#222";
  ctx.fillText(`-${d}`, pad - 10, h - 10);
  ctx.fillText(`${d}`, w - pad - 5, h - 10);
}

function runSpectrum() {
  try {
    const data = JSON.parse(
      lift_spectrum($("sp-family").value, Number($("sp-h").value), Number($("sp-n").value), BigInt($("sp-seed").value)),
    );
    drawSpectrum(data);
    const ratio = data.lambda_star / data.ramanujan;
    show(
      "sp-out",
      `h = ${data.h}, d = ${data.d}, n = ${data.n}\n` +
        `largest new |eigenvalue| = ${data.lambda_star.toFixed(6)}\n` +
        `2 sqrt(d - 1) = ${data.ramanujan.toFixed(6)} (dashed), ratio ${ratio.toFixed(4)}`,
    );
  } catch (e) {
    show("sp-out", String(e), true);
  }
}

function runDeviation() {
  try {
    const data = JSON.parse(deviation_curve(Number($("dv-lo").value), Number($("dv-hi").value), 600));
    const canvas = $("dv-canvas");
    const ctx = canvas.getContext("2d");
    const [w, h, pad] = [canvas.width, canvas.height, 30];
    axes(ctx, w, h, pad);
    const lo = data.eps[0];
    const hi = data.eps[data.eps.length - 1];
    const top = Math.max(...data.b, 1e-12);
    const xOf = (x) => pad + ((x - lo) / (hi - lo)) * (w - 2 * pad);
    const yOf = (y) => h - pad - (y / top) * (h - 2 * pad);
    const line = (ys, colour, dash) => {
      ctx.strokeStyle = colour;
      ctx.setLineDash(dash);
      ctx.beginPath();
      data.eps.forEach((x, k) => (k ? ctx.lineTo(xOf(x), yOf(ys[k])) : ctx.moveTo(xOf(x), yOf(ys[k]))));
      ctx.stroke();
    };
    line(data.b, "#4a78c2", []);
    line(data.lower_bound, "#c0392b", [6, 4]);
    ctx.setLineDash([]);
    show(
      "dv-out",
      `solid: b(eps) = (1 + eps) ln(1 + eps) - eps\n` +
        `dashed: eps^2 / 15 up to e^2 - 1 = ${data.threshold.toFixed(4)}, (1 + eps/2) ln(1 + eps) beyond`,
    );
  } catch (e) {
    show("dv-out", String(e), true);
  }
}

function runMatching() {
  try {
    const data = JSON.parse(
      matching_probability(BigInt($("mp-n").value), $("mp-a").value, $("mp-b").value, $("mp-e").value),
    );
    const ratio = data.exact / data.asymptotic;
    show(
      "mp-out",
      `exact        ${data.exact.toExponential(6)}${data.rational ? "  = " + data.rational : ""}\n` +
        `asymptotic   ${data.asymptotic.toExponential(6)}  (exponent ${data.exponent.toFixed(6)})\n` +
        `ratio        ${ratio.toFixed(6)}  within [${data.ratio_interval.map((x) => x.toFixed(6)).join(", ")}]\n` +
        `upper bound  ${data.corollary_bound.toExponential(6)}`,
    );
  } catch (e) {
    show("mp-out", String(e), true);
  }
}

await init();
$("sp-run").addEventListener("click", runSpectrum);
$("dv-run").addEventListener("click", runDeviation);
$("mp-run").addEventListener("click", runMatching);
runSpectrum();
runDeviation();
runMatching();
