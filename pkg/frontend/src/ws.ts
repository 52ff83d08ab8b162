/** Websocket client for the live cloud stream. One socket per page; all
 * control messages go through send() so tests can capture them. */

import type {
  StreamAck,
  StreamControl,
  StreamError,
  StreamFrame,
} from "./types.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: ((ev: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface StreamHandlers {
  onFrame?: (frame: StreamFrame) => void;
  onAck?: (ack: StreamAck) => void;
  onError?: (err: StreamError) => void;
  onClose?: () => void;
}

export class StreamClient {
  private socket: SocketLike | null = null;

  constructor(
    private readonly url: string,
    private readonly handlers: StreamHandlers,
    private readonly socketFactory: SocketFactory = (u) =>
      new WebSocket(u) as unknown as SocketLike,
  ) {}

  connect(): void {
    if (this.socket) return;
    const socket = this.socketFactory(this.url);
    socket.onmessage = (ev) => this.dispatch(ev.data);
    socket.onclose = () => {
      this.socket = null;
      this.handlers.onClose?.();
    };
    this.socket = socket;
  }

  get connected(): boolean {
    return this.socket !== null;
  }

  send(control: StreamControl): void {
    if (!this.socket) throw new Error("stream not connected");
    this.socket.send(JSON.stringify(control));
  }

  close(): void {
    this.socket?.close();
    this.socket = null;
  }

  private dispatch(data: string): void {
    let msg: Record<string, unknown>;
    try {
      msg = JSON.parse(data) as Record<string, unknown>;
    } catch {
      this.handlers.onError?.({ error: "unparseable stream message" });
      return;
    }
    if (typeof msg.error === "string") {
      this.handlers.onError?.(msg as unknown as StreamError);
    } else if (typeof msg.frame === "number") {
      this.handlers.onFrame?.(msg as unknown as StreamFrame);
    } else if (typeof msg.ok === "string") {
      this.handlers.onAck?.(msg as unknown as StreamAck);
    }
  }
}
