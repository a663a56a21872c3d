import { HttpSessionApi } from './api.js';
import { SessionController, type ViewState } from './controller.js';
import { PointDraft } from './draft.js';
import {
  canvasToImage,
  drawEnergySparkline,
  drawScene,
  hitTestControlPoint,
} from './render.js';
import type { AlphaSpec, SchemeName } from './types.js';

// Single-page wiring: load an image, click control points (shift-drag for the
// region box), confirm to create a session, then steer the running snake.

const el = <T extends HTMLElement>(id: string): T => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
};

const canvas = el<HTMLCanvasElement>('scene');
const spark = el<HTMLCanvasElement>('energy');
const fileInput = el<HTMLInputElement>('image-file');
const schemeSelect = el<HTMLSelectElement>('scheme');
const alphaMode = el<HTMLSelectElement>('alpha-mode');
const alphaValue = el<HTMLInputElement>('alpha-value');
const confirmBtn = el<HTMLButtonElement>('confirm');
const undoBtn = el<HTMLButtonElement>('undo');
const runBtn = el<HTMLButtonElement>('run');
const pauseBtn = el<HTMLButtonElement>('pause');
const stepBtn = el<HTMLButtonElement>('step-once');
const boundaryBtn = el<HTMLButtonElement>('toggle-boundary');
const resetBtn = el<HTMLButtonElement>('reset');
const retryBtn = el<HTMLButtonElement>('retry');
const statusLine = el<HTMLSpanElement>('status-line');
const hint = el<HTMLParagraphElement>('hint');
const banner = el<HTMLDivElement>('error-banner');
const bannerText = el<HTMLSpanElement>('error-text');

const ctx = canvas.getContext('2d');
const sparkCtx = spark.getContext('2d');
if (!ctx || !sparkCtx) throw new Error('canvas 2d context unavailable');

let bitmap: ImageBitmap | null = null;
let imageBase64 = '';
let scale = 1;
let draft: PointDraft | null = null;
let dragIndex = -1;
let dragBusy = false;
let boxStart: { row: number; col: number } | null = null;

const api = new HttpSessionApi('');
const controller = new SessionController(api, onRender);

function onRender(view: ViewState): void {
  drawScene(ctx!, bitmap, view, draft, scale);
  drawEnergySparkline(sparkCtx!, controller.energySeries);
  const s = view.state;
  statusLine.textContent = s
    ? `${s.status} · iter ${s.iters} · α=${s.alpha.toFixed(2)} · E=${s.energies.total.toFixed(1)}`
    : 'no session';
  banner.hidden = view.error === null;
  if (view.error !== null) bannerText.textContent = view.error;
  runBtn.disabled = !s || s.status !== 'running' || view.running;
  pauseBtn.disabled = !view.running;
  stepBtn.disabled = !s || s.status !== 'running';
}

function repaintDraft(): void {
  onRender(
    controller.rendered ?? { state: null, showBoundary: false, running: false, error: null },
  );
  confirmBtn.disabled = !draft || !draft.canConfirm;
  hint.textContent = draft?.validationMessage ?? 'confirm to start, or keep placing points';
}

fileInput.addEventListener('change', async () => {
  const file = fileInput.files?.[0];
  if (!file) return;
  const dataUrl = await new Promise<string>((resolve, reject) => {
    const reader = new FileReader();
    reader.onload = () => resolve(reader.result as string);
    reader.onerror = () => reject(reader.error);
    reader.readAsDataURL(file);
  });
  imageBase64 = dataUrl.slice(dataUrl.indexOf(',') + 1);
  bitmap = await createImageBitmap(file);
  scale = Math.max(1, Math.floor(640 / Math.max(bitmap.width, bitmap.height)));
  canvas.width = bitmap.width * scale;
  canvas.height = bitmap.height * scale;
  draft = new PointDraft(schemeSelect.value as SchemeName);
  await controller.close().catch(() => undefined);
  repaintDraft();
});

schemeSelect.addEventListener('change', () => {
  if (draft) {
    draft.scheme = schemeSelect.value as SchemeName;
    repaintDraft();
  }
});

function currentAlpha(): AlphaSpec {
  return alphaMode.value === 'fixed'
    ? { mode: 'fixed', value: Number(alphaValue.value) }
    : { mode: 'two-phase' };
}

alphaMode.addEventListener('change', () => {
  alphaValue.disabled = alphaMode.value !== 'fixed';
  if (controller.sessionId) void controller.setAlpha(currentAlpha());
});
alphaValue.addEventListener('change', () => {
  if (controller.sessionId && alphaMode.value === 'fixed') {
    void controller.setAlpha(currentAlpha());
  }
});

canvas.addEventListener('mousedown', (ev) => {
  const rect = canvas.getBoundingClientRect();
  const x = ev.clientX - rect.left;
  const y = ev.clientY - rect.top;
  if (draft) {
    if (ev.shiftKey) {
      boxStart = canvasToImage(x, y, scale);
    }
    return;
  }
  const points = controller.current?.polygon.points ?? [];
  dragIndex = hitTestControlPoint(points, x, y, scale);
});

canvas.addEventListener('mousemove', (ev) => {
  if (dragIndex < 0 || dragBusy) return;
  const rect = canvas.getBoundingClientRect();
  const { row, col } = canvasToImage(ev.clientX - rect.left, ev.clientY - rect.top, scale);
  // live but serialized: skip intermediate positions while one PATCH is out
  dragBusy = true;
  void controller.drag(dragIndex, row, col).finally(() => {
    dragBusy = false;
  });
});

canvas.addEventListener('mouseup', (ev) => {
  const rect = canvas.getBoundingClientRect();
  const { row, col } = canvasToImage(ev.clientX - rect.left, ev.clientY - rect.top, scale);
  if (draft) {
    if (boxStart) {
      draft.setBox(boxStart.row, boxStart.col, row, col);
      boxStart = null;
    } else {
      draft.add(row, col);
    }
    repaintDraft();
    return;
  }
  if (dragIndex >= 0) {
    void controller.drag(dragIndex, row, col);
    dragIndex = -1;
  }
});

confirmBtn.addEventListener('click', async () => {
  if (!draft || !imageBase64) return;
  const req = draft.toRequest(imageBase64, { alpha: currentAlpha() });
  draft = null;
  confirmBtn.disabled = true;
  undoBtn.disabled = true;
  await controller.open(req);
});

undoBtn.addEventListener('click', () => {
  draft?.undo();
  repaintDraft();
});

runBtn.addEventListener('click', () => controller.run());
pauseBtn.addEventListener('click', () => controller.pause());
stepBtn.addEventListener('click', () => void controller.step(1));
boundaryBtn.addEventListener('click', () => controller.toggleBoundary());
retryBtn.addEventListener('click', () => void controller.retry());

resetBtn.addEventListener('click', async () => {
  await controller.close().catch(() => undefined);
  if (bitmap) {
    draft = new PointDraft(schemeSelect.value as SchemeName);
    undoBtn.disabled = false;
    repaintDraft();
  }
});

repaintDraft();
