import { describe, expect, it } from 'vitest';

import type { MapGeometry, WorldSnapshot } from '../src/protocol.js';
import { Draw2D, renderFrame } from '../src/renderer.js';
import {
  buildViewModel,
  defaultCamera,
  panned,
  screenToWorld,
  worldToScreen,
  zoomed,
} from '../src/viewmodel.js';

function makeMap(nBuildings: number, nElements: number): MapGeometry {
  return {
    hash: 'h',
    bounds: [-200, -200, 200, 200],
    roads: [
      { id: 'r0', axis: 'EW', centerline: [[-200, 0], [200, 0]], width: 12, sidewalk_width: 4 },
      { id: 'r1', axis: 'NS', centerline: [[0, -200], [0, 200]], width: 12, sidewalk_width: 4 },
    ],
    intersections: [{ id: 'i0', center: [0, 0], signal: 's0' }],
    buildings: Array.from({ length: nBuildings }, (_, k) => ({
      id: `b${k}`,
      box: [20 * k, 20, 20 * k + 15, 40] as [number, number, number, number],
      door: [20 * k + 7.5, 8] as [number, number],
      tag: 'glass_tower',
    })),
    elements: Array.from({ length: nElements }, (_, k) => ({
      id: `e${k}`,
      class: k % 2 === 0 ? 'tree' : 'bench',
      box: [-30 - 5 * k, 6, -29 - 5 * k, 7] as [number, number, number, number],
    })),
  };
}

function makeSnapshot(nAgents: number, phase: 'NS_green' | 'EW_green' = 'NS_green'): WorldSnapshot {
  return {
    sim_time: 1.5,
    tick: 90,
    agents: Array.from({ length: nAgents }, (_, k) => ({
      id: k === 0 ? 'robot0' : `p${k}`,
      kind: k === 0 ? 'robot' : 'pedestrian',
      x: 8 * k,
      y: -8,
      radius: k === 0 ? 0.4 : 0.3,
      heading: 90 * k,
    })),
    signals: [{ intersection: 'i0', phase, remaining: 21.0 }],
    instructions: { robot0: { instruction: 'Face north.', category: 'orientation_alignment', subtask_index: 0 } },
    episode: 'running',
  };
}

class CountingDraw implements Draw2D {
  rects = 0;
  discs = 0;
  lines = 0;
  texts: string[] = [];
  clear(): void {}
  rect(): void {
    this.rects += 1;
  }
  disc(): void {
    this.discs += 1;
  }
  line(): void {
    this.lines += 1;
  }
  text(text: string): void {
    this.texts.push(text);
  }
}

describe('buildViewModel', () => {
  it('mirrors the snapshot entity set exactly, for varied snapshots', () => {
    for (let trial = 0; trial < 10; trial += 1) {
      const map = makeMap(1 + (trial % 4), trial % 3);
      const snapshot = makeSnapshot(1 + (trial % 5));
      const camera = defaultCamera(map, 800, 600);
      const view = buildViewModel(map, snapshot, camera, 'robot0');
      const drawnAgents = view.entities.filter((e) => e.layer === 'agent').map((e) => e.id);
      expect(new Set(drawnAgents)).toEqual(new Set(snapshot.agents.map((a) => a.id)));
      const drawnBuildings = view.entities.filter((e) => e.layer === 'building').map((e) => e.id);
      expect(new Set(drawnBuildings)).toEqual(new Set(map.buildings.map((b) => b.id)));
      const drawnElements = view.entities.filter((e) => e.layer === 'element').map((e) => e.id);
      expect(new Set(drawnElements)).toEqual(new Set(map.elements.map((e) => e.id)));
      const drawnSignals = view.entities.filter((e) => e.layer === 'signal');
      expect(drawnSignals).toHaveLength(snapshot.signals.length);
      expect(view.instruction).toBe('Face north.');
    }
  });

  it('signal badge mirrors the phase', () => {
    const map = makeMap(1, 0);
    const red = buildViewModel(map, makeSnapshot(1, 'EW_green'), defaultCamera(map, 800, 600));
    const badge = red.entities.find((e) => e.layer === 'signal');
    expect(badge?.kind).toBe('EW_green');
  });

  it('empty map still renders the background layers only', () => {
    const map: MapGeometry = { hash: 'h', bounds: [0, 0, 10, 10], roads: [], intersections: [], buildings: [], elements: [] };
    const snapshot: WorldSnapshot = { sim_time: 0, tick: 0, agents: [], signals: [], instructions: {}, episode: 'none' };
    const view = buildViewModel(map, snapshot, defaultCamera(map, 100, 100));
    expect(view.entities).toHaveLength(0);
    const draw = new CountingDraw();
    renderFrame(view, draw);
    expect(draw.rects + draw.discs).toBe(0);
  });
});

describe('camera transform', () => {
  it('pan/zoom round trip inverts exactly', () => {
    const map = makeMap(2, 2);
    let camera = defaultCamera(map, 1024, 768);
    camera = zoomed(panned(camera, 37.5, -12.25), 1.75);
    const points: [number, number][] = [
      [0, 0],
      [12.5, -33.25],
      [-180.125, 199.5],
    ];
    for (const [x, y] of points) {
      const [sx, sy] = worldToScreen(camera, x, y);
      const [wx, wy] = screenToWorld(camera, sx, sy);
      expect(wx).toBeCloseTo(x, 9);
      expect(wy).toBeCloseTo(y, 9);
    }
  });

  it('north is up on screen', () => {
    const map = makeMap(1, 0);
    const camera = defaultCamera(map, 800, 600);
    const [, syLow] = worldToScreen(camera, 0, -100);
    const [, syHigh] = worldToScreen(camera, 0, 100);
    expect(syHigh).toBeLessThan(syLow);
  });
});

describe('renderFrame', () => {
  it('draws every entity once and overlays the instruction', () => {
    const map = makeMap(3, 2);
    const snapshot = makeSnapshot(2);
    const view = buildViewModel(map, snapshot, defaultCamera(map, 800, 600), 'robot0');
    const draw = new CountingDraw();
    const drawn = renderFrame(view, draw);
    expect(drawn).toBe(view.entities.length);
    expect(draw.texts.some((t) => t.includes('Face north.'))).toBe(true);
  });
});
