// Browser entry point: connect, render at the snapshot rate, forward keys.
// Serve any static host for index.html and point it at the engine's port.

import { keyToAction, KEY_HELP } from './keymap.js';
import { EngineClient, WebSocketTransport } from './protocol.js';
import { transcriptFilename } from './recording.js';
import { Draw2D, renderFrame } from './renderer.js';
import { TeleopController } from './teleop.js';
import { buildViewModel, defaultCamera, panned, zoomed } from './viewmodel.js';

class CanvasDraw implements Draw2D {
  constructor(private ctx: CanvasRenderingContext2D) {}
  clear(w: number, h: number): void {
    this.ctx.fillStyle = '#eef0eb';
    this.ctx.fillRect(0, 0, w, h);
  }
  rect(x: number, y: number, w: number, h: number, fill: string): void {
    this.ctx.fillStyle = fill;
    this.ctx.fillRect(x, y, w, h);
  }
  disc(x: number, y: number, r: number, fill: string): void {
    this.ctx.fillStyle = fill;
    this.ctx.beginPath();
    this.ctx.arc(x, y, r, 0, Math.PI * 2);
    this.ctx.fill();
  }
  line(x0: number, y0: number, x1: number, y1: number, stroke: string, width: number): void {
    this.ctx.strokeStyle = stroke;
    this.ctx.lineWidth = width;
    this.ctx.beginPath();
    this.ctx.moveTo(x0, y0);
    this.ctx.lineTo(x1, y1);
    this.ctx.stroke();
  }
  text(text: string, x: number, y: number, fill: string): void {
    this.ctx.fillStyle = fill;
    this.ctx.font = '14px sans-serif';
    this.ctx.fillText(text, x, y);
  }
}

export async function startApp(canvas: HTMLCanvasElement, engineUrl: string, agentId: string): Promise<void> {
  const transport = new WebSocketTransport(engineUrl);
  await transport.ready();
  const client = new EngineClient(transport);
  const teleop = new TeleopController(client, agentId);
  await teleop.attach();
  const map = await client.map();
  let camera = defaultCamera(map, canvas.width, canvas.height);
  const ctx = canvas.getContext('2d');
  if (!ctx) {
    throw new Error('2d canvas context unavailable');
  }
  const draw = new CanvasDraw(ctx);

  let dragging = false;
  let last: [number, number] = [0, 0];
  canvas.addEventListener('mousedown', (e) => {
    dragging = true;
    last = [e.offsetX, e.offsetY];
  });
  canvas.addEventListener('mouseup', () => {
    dragging = false;
  });
  canvas.addEventListener('mousemove', (e) => {
    if (dragging) {
      camera = panned(camera, e.offsetX - last[0], e.offsetY - last[1]);
      last = [e.offsetX, e.offsetY];
    }
  });
  canvas.addEventListener('wheel', (e) => {
    camera = zoomed(camera, e.deltaY < 0 ? 1.15 : 1 / 1.15);
    e.preventDefault();
  });

  window.addEventListener('keydown', (e) => {
    if (e.key === 'x') {
      void downloadDemo(teleop);
      return;
    }
    const wasBound = keyToAction(e.key) !== null;
    teleop.handleKey(e.key);
    if (wasBound) {
      e.preventDefault();
    }
  });

  console.log(KEY_HELP + ' · X export demo');
  const loop = async () => {
    const snapshot = await client.snapshot();
    const view = buildViewModel(map, snapshot, camera, agentId);
    renderFrame(view, draw);
    const status = teleop.status();
    ctx.fillStyle = status.busy ? '#d00000' : '#2dc653';
    ctx.fillRect(canvas.width - 24, 8, 16, 16);
    window.setTimeout(loop, 50);
  };
  void loop();
}

async function downloadDemo(teleop: TeleopController): Promise<void> {
  const text = await teleop.exportDemo();
  const blob = new Blob([text], { type: 'application/jsonl' });
  const link = document.createElement('a');
  link.href = URL.createObjectURL(blob);
  link.download = transcriptFilename(teleop.recording.taskRef, teleop.recording.episodeStatus);
  link.click();
}
