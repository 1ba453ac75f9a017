// Canvas renderer: draws the view model's entity list in class-distinct styles.
// A minimal drawing interface keeps it testable without a real canvas.

import type { DrawnEntity, ViewModel } from './viewmodel.js';
import { worldToScreen } from './viewmodel.js';

export interface Draw2D {
  clear(width: number, height: number): void;
  rect(x: number, y: number, w: number, h: number, fill: string): void;
  disc(x: number, y: number, r: number, fill: string): void;
  line(x0: number, y0: number, x1: number, y1: number, stroke: string, width: number): void;
  text(text: string, x: number, y: number, fill: string): void;
}

const LAYER_ORDER: DrawnEntity['layer'][] = ['sidewalk', 'road', 'building', 'element', 'agent', 'signal'];

const FILLS: Record<string, string> = {
  sidewalk: '#c9c4b4',
  road: '#3d4148',
  building: '#8d99ae',
  tree: '#4f772d',
  cone: '#ff7b00',
  bench: '#b08968',
  parked_vehicle: '#6d6875',
  barrier: '#d62828',
  robot: '#ffd60a',
  vehicle: '#118ab2',
  pedestrian: '#ef476f',
  NS_green: '#2dc653',
  EW_green: '#d00000',
};

export function renderFrame(view: ViewModel, draw: Draw2D): number {
  const cam = view.camera;
  draw.clear(cam.screenW, cam.screenH);
  let drawn = 0;
  for (const layer of LAYER_ORDER) {
    for (const entity of view.entities) {
      if (entity.layer !== layer) {
        continue;
      }
      const fill = FILLS[entity.kind] ?? '#999999';
      if (entity.shape === 'rect') {
        const [x0, y0, x1, y1] = entity.coords;
        const [sx0, sy0] = worldToScreen(cam, x0, y1); // top-left on screen
        const [sx1, sy1] = worldToScreen(cam, x1, y0);
        draw.rect(sx0, sy0, sx1 - sx0, sy1 - sy0, fill);
      } else if (entity.shape === 'disc') {
        const [cx, cy, r] = entity.coords;
        const [sx, sy] = worldToScreen(cam, cx, cy);
        draw.disc(sx, sy, Math.max(2, r * cam.zoom), fill);
        if (entity.heading !== undefined) {
          const rad = (entity.heading * Math.PI) / 180;
          const hx = cx + Math.sin(rad) * r * 2;
          const hy = cy + Math.cos(rad) * r * 2;
          const [ex, ey] = worldToScreen(cam, hx, hy);
          draw.line(sx, sy, ex, ey, '#111111', 1);
        }
      }
      drawn += 1;
    }
  }
  if (view.instruction) {
    draw.text(view.instruction, 12, 20, '#111111');
  }
  draw.text(`t=${view.simTime.toFixed(2)}s  episode=${view.episode}`, 12, cam.screenH - 10, '#111111');
  return drawn;
}
