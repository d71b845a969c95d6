import init, { sampleField, leafPath, weightPath, weightKernelDim } from "./pkg/nullfiber_wasm.js";

const PRESETS = {
  level: {
    layers: [
      { activation: "softplus", weights: [[2, 1], [1, 0]], bias: [0, 0] },
      { activation: "softplus", weights: [[4, 0]], bias: [0] },
    ],
  },
  curved: {
    layers: [
      { activation: "tanh", weights: [[1.2, -0.7], [0.4, 1.1], [-0.9, -0.6]], bias: [0.1, -0.2, 0.3] },
      { activation: "softplus", weights: [[1.0, -1.3, 0.8]], bias: [0] },
    ],
  },
  weight: {
    layers: [
      { activation: "softplus", weights: [[0.8, -0.5]], bias: [0.1] },
      { activation: "softplus", weights: [[1.5]], bias: [0] },
    ],
  },
};

const plane = document.getElementById("plane");
const ctx = plane.getContext("2d");
const status = document.getElementById("status");
const specBox = document.getElementById("spec");
const num = (id) => parseFloat(document.getElementById(id).value);

let field = null;
let traces = [];

function extent() {
  const e = num("extent");
  return e > 0 ? e : 3;
}

function toScreen(x, y) {
  const e = extent();
  return [((x + e) / (2 * e)) * plane.width, ((e - y) / (2 * e)) * plane.height];
}

function toPlane(px, py) {
  const e = extent();
  return [(px / plane.width) * 2 * e - e, e - (py / plane.height) * 2 * e];
}

function shade(t) {
  const r = Math.round(40 + 200 * t);
  const g = Math.round(80 + 120 * (1 - Math.abs(2 * t - 1)));
  const b = Math.round(230 - 190 * t);
  return `rgb(${r},${g},${b})`;
}

function report(text, isError = false) {
  status.textContent = text;
  status.className = isError ? "error" : "";
}

function computeField() {
  const e = extent();
  const n = 70;
  const values = sampleField(specBox.value, -e, e, -e, e, n, n);
  let lo = Infinity;
  let hi = -Infinity;
  for (let i = 0; i < values.length; i += 3) {
    lo = Math.min(lo, values[i]);
    hi = Math.max(hi, values[i]);
  }
  const arrows = sampleField(specBox.value, -e, e, -e, e, 15, 15);
  field = { n, values, lo, hi, arrows };
}

function draw() {
  ctx.clearRect(0, 0, plane.width, plane.height);
  if (!field) return;
  const { n, values, lo, hi, arrows } = field;
  const cw = plane.width / (n - 1);
  const ch = plane.height / (n - 1);
  const span = hi > lo ? hi - lo : 1;
  for (let j = 0; j < n; j++) {
    for (let i = 0; i < n; i++) {
      const v = values[3 * (j * n + i)];
      ctx.fillStyle = shade((v - lo) / span);
      const [sx, sy] = toScreen(...cellCenter(i, j, n));
      ctx.fillRect(sx - cw / 2, sy - ch / 2, cw + 1, ch + 1);
    }
  }
  ctx.strokeStyle = "rgba(0,0,0,0.55)";
  ctx.lineWidth = 1;
  const m = 15;
  const len = plane.width / m / 2.6;
  for (let j = 0; j < m; j++) {
    for (let i = 0; i < m; i++) {
      const k = 3 * (j * m + i);
      const kx = arrows[k + 1];
      const ky = arrows[k + 2];
      if (Number.isNaN(kx)) continue;
      const [sx, sy] = toScreen(...cellCenter(i, j, m));
      ctx.beginPath();
      ctx.moveTo(sx - kx * len, sy + ky * len);
      ctx.lineTo(sx + kx * len, sy - ky * len);
      ctx.stroke();
    }
  }
  ctx.lineWidth = 2.5;
  for (const t of traces) {
    ctx.strokeStyle = "#111";
    ctx.beginPath();
    for (let r = 0; r < t.rows; r++) {
      const [sx, sy] = toScreen(t.data[3 * r], t.data[3 * r + 1]);
      if (r === 0) ctx.moveTo(sx, sy);
      else ctx.lineTo(sx, sy);
    }
    ctx.stroke();
    const [cx, cy] = toScreen(t.x, t.y);
    ctx.fillStyle = "#fff";
    ctx.beginPath();
    ctx.arc(cx, cy, 4, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function cellCenter(i, j, n) {
  const e = extent();
  return [-e + (2 * e * i) / (n - 1), -e + (2 * e * j) / (n - 1)];
}

function redraw() {
  try {
    computeField();
    report(`output range [${field.lo.toFixed(4)}, ${field.hi.toFixed(4)}]`);
  } catch (err) {
    field = null;
    report(String(err.message ?? err), true);
  }
  draw();
}

plane.addEventListener("click", (ev) => {
  const rect = plane.getBoundingClientRect();
  const [x, y] = toPlane(ev.clientX - rect.left, ev.clientY - rect.top);
  try {
    const path = leafPath(specBox.value, x, y, num("h"), Math.max(1, Math.round(num("steps"))));
    const data = path.data;
    const rows = data.length / path.width;
    let spread = 0;
    for (let r = 0; r < rows; r++) spread = Math.max(spread, Math.abs(data[3 * r + 2] - data[2]));
    traces.push({ x, y, data, rows });
    const stop = path.note ? `, stopped early: ${path.note}` : "";
    report(`leaf through (${x.toFixed(3)}, ${y.toFixed(3)}): ${rows} vertices, ` +
      `output spread ${spread.toExponential(2)}${stop}`);
    path.free();
  } catch (err) {
    report(String(err.message ?? err), true);
  }
  draw();
});

function traceWeights() {
  const out = document.getElementById("weight-status");
  const canvas = document.getElementById("weights");
  const wctx = canvas.getContext("2d");
  wctx.clearRect(0, 0, canvas.width, canvas.height);
  try {
    const x = num("wx");
    const y = num("wy");
    const dim = weightKernelDim(specBox.value, x, y);
    if (dim === 0) throw new Error("the weight-space kernel is trivial here");
    const a = (num("angle") * Math.PI) / 180;
    const coeffs = new Float64Array(dim);
    coeffs[0] = Math.cos(a);
    if (dim > 1) coeffs[1] = Math.sin(a);
    const steps = Math.round(num("wsteps"));
    const paths = [weightPath(specBox.value, x, y, coeffs, 0.02, steps),
      weightPath(specBox.value, x, y, coeffs, 0.02, -steps)];
    let lo = [Infinity, Infinity];
    let hi = [-Infinity, -Infinity];
    let spread = 0;
    const base = paths[0].data[paths[0].width - 1];
    const series = paths.map((p) => ({ w: p.width, d: p.data, note: p.note }));
    for (const s of series) {
      for (let r = 0; r < s.d.length / s.w; r++) {
        for (let c = 0; c < 2; c++) {
          lo[c] = Math.min(lo[c], s.d[r * s.w + c]);
          hi[c] = Math.max(hi[c], s.d[r * s.w + c]);
        }
        spread = Math.max(spread, Math.abs(s.d[r * s.w + s.w - 1] - base));
      }
    }
    const pad = 0.1 * Math.max(hi[0] - lo[0], hi[1] - lo[1], 1e-3);
    const scale = (canvas.width - 20) / (Math.max(hi[0] - lo[0], hi[1] - lo[1]) + 2 * pad);
    const sx = (v) => 10 + (v - lo[0] + pad) * scale;
    const sy = (v) => canvas.height - 10 - (v - lo[1] + pad) * scale;
    wctx.lineWidth = 2;
    series.forEach((s, k) => {
      wctx.strokeStyle = k === 0 ? "#c33" : "#36c";
      wctx.beginPath();
      for (let r = 0; r < s.d.length / s.w; r++) {
        const px = sx(s.d[r * s.w]);
        const py = sy(s.d[r * s.w + 1]);
        if (r === 0) wctx.moveTo(px, py);
        else wctx.lineTo(px, py);
      }
      wctx.stroke();
    });
    const notes = series.map((s) => s.note).filter((n) => n);
    out.className = "";
    out.textContent = `kernel dimension ${dim}, output ${base.toFixed(10)}, ` +
      `max change ${spread.toExponential(2)}` + (notes.length ? `\nstopped early: ${notes.join("; ")}` : "");
    paths.forEach((p) => p.free());
  } catch (err) {
    out.className = "error";
    out.textContent = String(err.message ?? err);
  }
}

function loadPreset() {
  specBox.value = JSON.stringify(PRESETS[document.getElementById("preset").value], null, 2);
  traces = [];
  redraw();
}

document.getElementById("preset").addEventListener("change", loadPreset);
document.getElementById("redraw").addEventListener("click", () => { traces = []; redraw(); });
document.getElementById("clear").addEventListener("click", () => { traces = []; draw(); });
document.getElementById("wtrace").addEventListener("click", traceWeights);

await init();
loadPreset();
