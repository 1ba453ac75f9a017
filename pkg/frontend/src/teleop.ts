// Teleop controller: keyboard -> engine steps with a busy gate, feeding the
// recording buffer. Transport-agnostic so tests can drive it over raw TCP.

import { keyToAction } from './keymap.js';
import type { EngineClient, EngineResponse } from './protocol.js';
import { RecordingBuffer } from './recording.js';

export interface TeleopStatus {
  busy: boolean;
  dropped: number;
  submitted: number;
  lastResult: string | null;
  episode: string;
}

export class TeleopController {
  readonly recording = new RecordingBuffer();
  private busy = false;
  private dropped = 0;
  private submitted = 0;
  private lastResult: string | null = null;
  private episode = 'running';
  private pose = { x: 0, y: 0, heading: 0 };
  private started = Date.now();

  constructor(
    private client: EngineClient,
    private agentId: string,
    private now: () => number = () => Date.now(),
  ) {}

  async attach(): Promise<void> {
    const resp = await this.client.reset(this.agentId);
    const obs = resp.observation as { position: [number, number]; heading: number } | undefined;
    if (obs) {
      this.pose = { x: obs.position[0], y: obs.position[1], heading: obs.heading };
    }
    this.episode = (resp.episode as string) ?? 'running';
    this.started = this.now();
  }

  status(): TeleopStatus {
    return {
      busy: this.busy,
      dropped: this.dropped,
      submitted: this.submitted,
      lastResult: this.lastResult,
      episode: this.episode,
    };
  }

  currentPose(): { x: number; y: number; heading: number } {
    return { ...this.pose };
  }

  /**
   * Handle one key press. Returns the response promise when an action was
   * submitted, or null when the key was unbound or gated by a busy agent
   * (gated presses send nothing over the wire).
   */
  handleKey(key: string): Promise<EngineResponse> | null {
    const action = keyToAction(key);
    if (!action) {
      return null;
    }
    if (this.busy || this.episode !== 'running') {
      this.dropped += 1;
      return null;
    }
    this.busy = true;
    this.recording.append({
      timestamp: this.now() - this.started,
      action,
      prePose: { ...this.pose },
    });
    this.submitted += 1;
    return this.client.step(this.agentId, action).then((resp) => {
      this.busy = false;
      this.lastResult = (resp.result as string) ?? null;
      this.episode = (resp.episode as string) ?? this.episode;
      const obs = resp.observation as { position: [number, number]; heading: number } | null;
      if (obs) {
        this.pose = { x: obs.position[0], y: obs.position[1], heading: obs.heading };
      }
      if (this.episode !== 'running') {
        this.recording.markEpisode(this.episode);
      }
      return resp;
    });
  }

  /** Fetch the authoritative transcript and render it in replay format. */
  async exportDemo(): Promise<string> {
    const { entries, episode } = await this.client.transcript();
    this.recording.markEpisode(episode);
    const mine = entries.filter((e) => e.agent === this.agentId);
    return this.recording.exportTranscript(mine);
  }
}
