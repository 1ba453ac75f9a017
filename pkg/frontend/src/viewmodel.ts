// View model: the exact entity set to draw, derived from the latest snapshot
// (no extrapolation), plus a pan/zoom camera with an exact inverse transform.

import type { MapGeometry, WorldSnapshot } from './protocol.js';

export interface DrawnEntity {
  id: string;
  layer: 'road' | 'sidewalk' | 'building' | 'element' | 'agent' | 'signal';
  kind: string;
  shape: 'rect' | 'disc' | 'line';
  // rect: [x0, y0, x1, y1]; disc: [cx, cy, r]; line: [x0, y0, x1, y1]
  coords: number[];
  heading?: number;
  label?: string;
}

export interface Camera {
  panX: number; // world meters at screen center
  panY: number;
  zoom: number; // pixels per meter
  screenW: number;
  screenH: number;
}

export interface ViewModel {
  entities: DrawnEntity[];
  instruction: string | null;
  episode: string;
  simTime: number;
  camera: Camera;
}

export function defaultCamera(map: MapGeometry, screenW: number, screenH: number): Camera {
  const [x0, y0, x1, y1] = map.bounds;
  const zoom = Math.min(screenW / (x1 - x0), screenH / (y1 - y0));
  return { panX: (x0 + x1) / 2, panY: (y0 + y1) / 2, zoom, screenW, screenH };
}

/** World meters -> screen pixels (y flipped: north up). */
export function worldToScreen(camera: Camera, x: number, y: number): [number, number] {
  return [
    camera.screenW / 2 + (x - camera.panX) * camera.zoom,
    camera.screenH / 2 - (y - camera.panY) * camera.zoom,
  ];
}

export function screenToWorld(camera: Camera, sx: number, sy: number): [number, number] {
  return [
    camera.panX + (sx - camera.screenW / 2) / camera.zoom,
    camera.panY - (sy - camera.screenH / 2) / camera.zoom,
  ];
}

export function panned(camera: Camera, dxPixels: number, dyPixels: number): Camera {
  return {
    ...camera,
    panX: camera.panX - dxPixels / camera.zoom,
    panY: camera.panY + dyPixels / camera.zoom,
  };
}

export function zoomed(camera: Camera, factor: number): Camera {
  return { ...camera, zoom: camera.zoom * factor };
}

function roadRect(road: MapGeometry['roads'][number], withSidewalk: boolean): number[] {
  const [[ax, ay], [bx, by]] = road.centerline;
  const half = road.width / 2 + (withSidewalk ? road.sidewalk_width : 0);
  if (road.axis === 'NS') {
    return [ax - half, Math.min(ay, by), ax + half, Math.max(ay, by)];
  }
  return [Math.min(ax, bx), ay - half, Math.max(ax, bx), ay + half];
}

/** Build the drawable scene for one snapshot; entity set mirrors it exactly. */
export function buildViewModel(
  map: MapGeometry,
  snapshot: WorldSnapshot,
  camera: Camera,
  controlledAgent?: string,
): ViewModel {
  const entities: DrawnEntity[] = [];
  for (const road of map.roads) {
    entities.push({ id: `${road.id}:sidewalk`, layer: 'sidewalk', kind: 'sidewalk', shape: 'rect', coords: roadRect(road, true) });
  }
  for (const road of map.roads) {
    entities.push({ id: road.id, layer: 'road', kind: 'road', shape: 'rect', coords: roadRect(road, false) });
  }
  for (const building of map.buildings) {
    entities.push({ id: building.id, layer: 'building', kind: 'building', shape: 'rect', coords: [...building.box], label: building.tag });
  }
  for (const element of map.elements) {
    entities.push({ id: element.id, layer: 'element', kind: element.class, shape: 'rect', coords: [...element.box] });
  }
  for (const agent of snapshot.agents) {
    entities.push({
      id: agent.id,
      layer: 'agent',
      kind: agent.kind,
      shape: 'disc',
      coords: [agent.x, agent.y, agent.radius],
      heading: agent.heading,
    });
  }
  const centers = new Map(map.intersections.map((i) => [i.id, i.center]));
  for (const signal of snapshot.signals) {
    const center = centers.get(signal.intersection);
    if (!center) {
      continue;
    }
    entities.push({
      id: `${signal.intersection}:signal`,
      layer: 'signal',
      kind: signal.phase,
      shape: 'disc',
      coords: [center[0], center[1], 2.5],
      label: `${signal.phase} ${signal.remaining.toFixed(0)}s`,
    });
  }
  let instruction: string | null = null;
  if (controlledAgent && snapshot.instructions[controlledAgent]) {
    instruction = snapshot.instructions[controlledAgent]?.instruction ?? null;
  }
  return { entities, instruction, episode: snapshot.episode, simTime: snapshot.sim_time, camera };
}
