import init, { fitCurves, mrsCurves, newtonCurves } from "./pkg/deepweight_demo.js";

const COLORS = ["#000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

// series: [{ y: [...], color, label, dash }]
function plot(canvas, xs, series, { logY = false, shade = null } = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, pad = 48;
  ctx.clearRect(0, 0, W, H);
  const tf = (v) => (logY ? Math.log10(Math.max(Math.abs(v), 1e-17)) : v);
  let lo = Infinity, hi = -Infinity;
  for (const s of series) for (const v of s.y) {
    const t = tf(v);
    if (Number.isFinite(t)) { lo = Math.min(lo, t); hi = Math.max(hi, t); }
  }
  if (!(hi > lo)) { hi = lo + 1; }
  const x0 = xs[0], x1 = xs[xs.length - 1];
  const px = (x) => pad + ((x - x0) / (x1 - x0)) * (W - 2 * pad);
  const py = (t) => H - pad - ((t - lo) / (hi - lo)) * (H - 2 * pad);

  if (shade) {
    ctx.fillStyle = "rgba(31,119,180,0.08)";
    ctx.fillRect(px(shade[0]), pad, px(shade[1]) - px(shade[0]), H - 2 * pad);
  }
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, W - 2 * pad, H - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  for (let i = 0; i <= 4; i++) {
    const t = lo + ((hi - lo) * i) / 4;
    ctx.fillText(logY ? `1e${t.toFixed(1)}` : t.toPrecision(3), 2, py(t) + 4);
    const x = x0 + ((x1 - x0) * i) / 4;
    ctx.fillText(x.toPrecision(3), px(x) - 10, H - pad + 16);
  }
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.setLineDash(s.dash || []);
    ctx.beginPath();
    let pen = false;
    xs.forEach((x, i) => {
      const t = tf(s.y[i]);
      if (!Number.isFinite(t)) { pen = false; return; }
      const yy = Math.min(Math.max(py(t), pad), H - pad);
      pen ? ctx.lineTo(px(x), yy) : ctx.moveTo(px(x), yy);
      pen = true;
    });
    ctx.stroke();
  }
  ctx.setLineDash([]);
}

function legend(el, series) {
  el.innerHTML = series.map((s) => `<span style="color:${s.color}">&#9632; ${s.label}</span>`).join("");
}

const $ = (id) => document.getElementById(id);

function runFit() {
  const out = $("fit-summary");
  out.textContent = "training...";
  setTimeout(() => {
    try {
      const r = JSON.parse(fitCurves(
        $("fit-target").value, +$("fit-a").value, +$("fit-b").value, $("fit-widths").value,
        $("fit-weight").value, +$("fit-restarts").value, +$("fit-iters").value, +$("fit-seed").value,
      ));
      const logY = $("fit-log").checked;
      const err = (q) => q.map((v, i) => v - r.f[i]);
      const series = logY
        ? [
            { y: err(r.weighted), color: COLORS[1], label: "weighted |error|" },
            { y: err(r.unweighted), color: COLORS[2], label: "unweighted |error|" },
            { y: err(r.cheb), color: COLORS[3], label: "chebyshev |error|" },
          ]
        : [
            { y: r.f, color: COLORS[0], label: "target" },
            { y: r.weighted, color: COLORS[1], label: "weighted", dash: [6, 3] },
            { y: r.unweighted, color: COLORS[2], label: "unweighted" },
            { y: r.cheb, color: COLORS[3], label: "chebyshev" },
          ];
      legend($("fit-legend"), series);
      plot($("fit-canvas"), r.x, series, { logY });
      out.textContent = JSON.stringify(r.summary, null, 2);
    } catch (e) {
      out.textContent = String(e);
    }
  }, 20);
}

function runMrs() {
  try {
    const r = JSON.parse(mrsCurves($("mrs-coeffs").value, +$("mrs-lambda").value));
    plot($("mrs-canvas"), r.x, [{ y: r.y, color: COLORS[1] }], { shade: [-r.a_n, r.a_n] });
    $("mrs-summary").textContent =
      `a_n = ${r.a_n.toPrecision(8)} for degree ${r.degree}\n` +
      `sup inside  = ${r.sup_inside.toExponential(6)} at x = ${r.argmax.toFixed(4)}\n` +
      `sup outside = ${r.sup_outside.toExponential(6)}\nrestricted range holds: ${r.holds}`;
  } catch (e) {
    $("mrs-summary").textContent = String(e);
  }
}

function runNewton() {
  const k = +$("newton-k").value;
  $("newton-k-label").textContent = k;
  const r = JSON.parse(newtonCurves(k));
  const series = [{ y: r.x.map(Math.abs), color: COLORS[0], label: "|x|" }];
  r.curves.forEach((y, i) => series.push({ y, color: COLORS[1 + (i % 6)], dash: i === k ? [] : [2, 3] }));
  plot($("newton-canvas"), r.x, series);
  $("newton-summary").textContent = r.max_error
    .map((e, i) => `k=${i}: max error on [0.1, 1] = ${e.toExponential(3)}`)
    .join("\n");
}

await init();
$("fit-run").addEventListener("click", runFit);
$("fit-log").addEventListener("change", runFit);
$("mrs-run").addEventListener("click", runMrs);
$("newton-k").addEventListener("input", runNewton);
runMrs();
runNewton();
