// Teleop key bindings: WASD translations, Q/E turns, space stay,
// Enter evaluate, V check_task_complete.

import type { RobotAction } from './protocol.js';

const BINDINGS: Record<string, RobotAction> = {
  w: { kind: 'move_forward' },
  s: { kind: 'move_backward' },
  a: { kind: 'move_left' },
  d: { kind: 'move_right' },
  q: { kind: 'turn_left' },
  e: { kind: 'turn_right' },
  ' ': { kind: 'stay' },
  enter: { kind: 'evaluate' },
  v: { kind: 'check_task_complete' },
};

export function keyToAction(key: string): RobotAction | null {
  const action = BINDINGS[key.toLowerCase()];
  return action ? { ...action } : null;
}

export const KEY_HELP = 'W/A/S/D move · Q/E turn · space stay · Enter evaluate · V confirm meetup';
