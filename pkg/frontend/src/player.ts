/**
 * Frame playback with bounded prefetch.
 *
 * Playing walks frames sequentially at a user-set rate while keeping a
 * window of PREFETCH_DEPTH requests in flight ahead of the playhead. A seek
 * aborts every pending prefetch and jumps. At most PREFETCH_DEPTH + 1
 * decoded frames are ever buffered, so client memory stays flat no matter
 * how long the trajectory is.
 */

import { StreamApi } from "./api.js";
import { DecodedFrame } from "./wire.js";

export const PREFETCH_DEPTH = 4;

interface Pending {
  controller: AbortController;
  promise: Promise<void>;
}

export class FramePlayer {
  current = 0;
  playing = false;
  private buffer = new Map<number, DecodedFrame>();
  private pending = new Map<number, Pending>();
  private timer: ReturnType<typeof setTimeout> | null = null;
  private generation = 0;

  constructor(
    private api: StreamApi,
    public trajectoryId: string,
    public nFrames: number,
    private onFrame: (frame: DecodedFrame, index: number) => void,
    public fps = 10
  ) {}

  get bufferedCount(): number {
    return this.buffer.size;
  }

  /** Fetch (or reuse) one frame and hand it to the display callback. */
  async show(index: number): Promise<DecodedFrame> {
    if (index < 0 || index >= this.nFrames) {
      throw new RangeError(`frame ${index} out of range [0, ${this.nFrames})`);
    }
    this.current = index;
    let frame = this.buffer.get(index);
    if (!frame) {
      frame = await this.fetchInto(index);
    }
    this.trimBuffer();
    this.onFrame(frame, index);
    return frame;
  }

  /** Jump to a frame, cancelling all in-flight prefetches first. */
  async seek(index: number): Promise<DecodedFrame> {
    this.generation++;
    for (const p of this.pending.values()) {
      p.controller.abort();
    }
    this.pending.clear();
    this.buffer.clear();
    return this.show(index);
  }

  play(): void {
    if (this.playing || this.nFrames === 0) return;
    this.playing = true;
    const step = async () => {
      if (!this.playing) return;
      const index = this.current;
      try {
        await this.show(index);
        this.prefetch(index + 1);
      } catch (err) {
        this.playing = false;
        throw err;
      }
      if (index + 1 >= this.nFrames) {
        this.playing = false;
        return;
      }
      this.current = index + 1;
      this.timer = setTimeout(step, 1000 / this.fps);
    };
    void step();
  }

  pause(): void {
    this.playing = false;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  dispose(): void {
    this.pause();
    for (const p of this.pending.values()) {
      p.controller.abort();
    }
    this.pending.clear();
    this.buffer.clear();
  }

  /** Issue up to PREFETCH_DEPTH lookahead requests from `from`. */
  private prefetch(from: number): void {
    for (let i = from; i < Math.min(from + PREFETCH_DEPTH, this.nFrames); i++) {
      if (!this.buffer.has(i) && !this.pending.has(i)) {
        void this.fetchInto(i).catch(() => {
          // prefetch failures surface when the frame is actually shown
        });
      }
    }
  }

  private fetchInto(index: number): Promise<DecodedFrame> {
    const controller = new AbortController();
    const generation = this.generation;
    const promise = this.api
      .getFrame(this.trajectoryId, index, { signal: controller.signal })
      .then((frame) => {
        this.pending.delete(index);
        if (generation === this.generation) {
          this.buffer.set(index, frame);
          this.trimBuffer();
        }
        return frame;
      })
      .catch((err) => {
        this.pending.delete(index);
        throw err;
      });
    this.pending.set(index, { controller, promise: promise.then(() => undefined, () => undefined) });
    return promise;
  }

  /** Keep only the playhead frame plus the prefetch window. */
  private trimBuffer(): void {
    const keepFrom = this.current;
    const keepTo = this.current + PREFETCH_DEPTH;
    for (const key of [...this.buffer.keys()]) {
      if (key < keepFrom || key > keepTo) {
        this.buffer.delete(key);
      }
    }
    while (this.buffer.size > PREFETCH_DEPTH + 1) {
      const oldest = this.buffer.keys().next().value as number;
      this.buffer.delete(oldest);
    }
  }
}
