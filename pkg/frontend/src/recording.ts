// Demonstration recording: append-only during an episode, exported in the
// engine replay format so a headless replay reproduces the session.

import type { RobotAction, TranscriptEntry } from './protocol.js';

export interface RecordedStep {
  timestamp: number; // ms since session start
  action: RobotAction;
  prePose: { x: number; y: number; heading: number };
}

export class RecordingBuffer {
  readonly steps: RecordedStep[] = [];
  taskRef: string | null = null;
  episodeStatus = 'running';
  private exported = false;

  append(step: RecordedStep): void {
    if (this.exported) {
      throw new Error('recording already exported');
    }
    this.steps.push(step);
  }

  markEpisode(status: string): void {
    this.episodeStatus = status;
  }

  /**
   * Render the engine-side transcript to replay-format JSONL. The engine is
   * authoritative for submit times; this buffer cross-checks the action count.
   */
  exportTranscript(engineEntries: TranscriptEntry[]): string {
    if (engineEntries.length !== this.steps.length) {
      throw new Error(
        `recorded ${this.steps.length} actions but engine transcript has ${engineEntries.length}`,
      );
    }
    this.exported = true;
    const lines = engineEntries.map((entry) =>
      JSON.stringify({ action: entry.action, agent: entry.agent, units: entry.units }),
    );
    return lines.join('\n') + '\n';
  }
}

export function transcriptFilename(taskRef: string | null, episodeStatus: string): string {
  const base = taskRef ? `demo_${taskRef}` : 'demo';
  return `${base}_${episodeStatus}.transcript.jsonl`;
}
