// Engine wire protocol: one JSON object per line, one response per request.
// The same payloads ride raw TCP lines or WebSocket text frames.

export interface RobotAction {
  kind: string;
  view?: string;
  text?: string;
}

export interface AgentSnapshot {
  id: string;
  kind: 'robot' | 'vehicle' | 'pedestrian';
  x: number;
  y: number;
  radius: number;
  heading?: number;
  speed?: number;
  available?: boolean;
}

export interface SignalSnapshot {
  intersection: string;
  phase: 'NS_green' | 'EW_green';
  remaining: number;
}

export interface WorldSnapshot {
  sim_time: number;
  tick: number;
  agents: AgentSnapshot[];
  signals: SignalSnapshot[];
  instructions: Record<string, { instruction?: string; category?: string; subtask_index?: number } | null>;
  episode: string;
}

export interface MapGeometry {
  hash: string;
  bounds: [number, number, number, number];
  roads: { id: string; axis: 'NS' | 'EW'; centerline: [number, number][]; width: number; sidewalk_width: number }[];
  intersections: { id: string; center: [number, number]; signal: string | null }[];
  buildings: { id: string; box: [number, number, number, number]; door: [number, number]; tag: string }[];
  elements: { id: string; class: string; box: [number, number, number, number] }[];
}

export interface TranscriptEntry {
  units: number;
  agent: string;
  action: RobotAction;
}

export interface EngineResponse {
  status: 'ok' | 'error';
  error?: { code: string; message: string };
  [key: string]: unknown;
}

// Transport: framed line in, framed line out. TCP and WebSocket both fit.
export interface Transport {
  send(line: string): void;
  onLine(handler: (line: string) => void): void;
  close(): void;
}

/** Sequential request/response client over a line transport. */
export class EngineClient {
  private queue: Array<(response: EngineResponse) => void> = [];

  constructor(private transport: Transport) {
    transport.onLine((line) => {
      const resolve = this.queue.shift();
      if (!resolve) {
        return; // unsolicited line; the protocol never produces these
      }
      resolve(JSON.parse(line) as EngineResponse);
    });
  }

  request(doc: Record<string, unknown>): Promise<EngineResponse> {
    return new Promise((resolve) => {
      this.queue.push(resolve);
      this.transport.send(JSON.stringify(doc));
    });
  }

  async info(): Promise<EngineResponse> {
    return this.request({ op: 'info' });
  }

  async reset(agent: string): Promise<EngineResponse> {
    return this.request({ op: 'reset', agent });
  }

  async step(agent: string, action: RobotAction): Promise<EngineResponse> {
    return this.request({ op: 'step', agent, action });
  }

  async map(): Promise<MapGeometry> {
    const resp = await this.request({ op: 'map' });
    return resp.map as MapGeometry;
  }

  async snapshot(): Promise<WorldSnapshot> {
    const resp = await this.request({ op: 'snapshot' });
    return resp.snapshot as WorldSnapshot;
  }

  async transcript(): Promise<{ entries: TranscriptEntry[]; episode: string }> {
    const resp = await this.request({ op: 'transcript' });
    return { entries: resp.transcript as TranscriptEntry[], episode: resp.episode as string };
  }

  close(): void {
    this.transport.close();
  }
}

/** Browser transport: the WebSocket API handles framing natively. */
export class WebSocketTransport implements Transport {
  private handlers: Array<(line: string) => void> = [];
  private socket: WebSocket;

  constructor(url: string) {
    this.socket = new WebSocket(url);
    this.socket.onmessage = (event: MessageEvent) => {
      for (const handler of this.handlers) {
        handler(String(event.data));
      }
    };
  }

  ready(): Promise<void> {
    if (this.socket.readyState === WebSocket.OPEN) {
      return Promise.resolve();
    }
    return new Promise((resolve, reject) => {
      this.socket.onopen = () => resolve();
      this.socket.onerror = (err) => reject(err);
    });
  }

  send(line: string): void {
    this.socket.send(line);
  }

  onLine(handler: (line: string) => void): void {
    this.handlers.push(handler);
  }

  close(): void {
    this.socket.close();
  }
}
