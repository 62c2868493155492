import type { Scene, Trajectory } from "./types.js";

export interface FrameView {
  index: number;
  scene: Scene;
  cumulativeCustom: number;
  cumulativeLegacy: number;
  isLast: boolean;
}

// Pure playback model over a served trajectory: the console never
// recomputes physics or rewards, so everything a frame shows is
// derived from server data once, up front.
export class Playback {
  readonly frameCount: number;
  private cumCustom: number[] = [];
  private cumLegacy: number[] = [];
  private frame = 0;
  private playing = false;
  private timer: ReturnType<typeof setInterval> | null = null;
  private listeners: Array<(view: FrameView) => void> = [];

  constructor(
    private readonly trajectory: Trajectory,
    public fps = 50, // 1 / tau for CartPole: real-time playback
  ) {
    this.frameCount = trajectory.scenes.length;
    let custom = 0;
    let legacy = 0;
    for (const step of trajectory.steps) {
      custom += step.custom_reward;
      legacy += step.legacy_reward;
      this.cumCustom.push(custom);
      this.cumLegacy.push(legacy);
    }
  }

  view(index = this.frame): FrameView {
    return {
      index,
      scene: this.trajectory.scenes[index],
      cumulativeCustom: this.cumCustom[index],
      cumulativeLegacy: this.cumLegacy[index],
      isLast: index === this.frameCount - 1,
    };
  }

  onFrame(listener: (view: FrameView) => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    const view = this.view();
    for (const fn of this.listeners) fn(view);
  }

  seek(index: number): void {
    this.frame = Math.max(0, Math.min(this.frameCount - 1, index));
    this.emit();
  }

  get position(): number {
    return this.frame;
  }

  get isPlaying(): boolean {
    return this.playing;
  }

  play(): void {
    if (this.playing || this.frameCount === 0) return;
    this.playing = true;
    if (this.frame >= this.frameCount - 1) this.frame = 0;
    this.timer = setInterval(() => {
      if (this.frame >= this.frameCount - 1) {
        this.pause();
        return;
      }
      this.frame += 1;
      this.emit();
    }, 1000 / this.fps);
  }

  pause(): void {
    this.playing = false;
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}

// ---------------------------------------------------------------- drawing

export interface Segment {
  kind: "line" | "rect" | "circle" | "polyline";
  points: Array<[number, number]>; // canvas coordinates
}

// Geometry -> canvas primitives, kept separate from the 2D context so
// it can be unit-tested without a canvas implementation.
export function scenePrimitives(
  scene: Scene, width: number, height: number,
): Segment[] {
  if (scene.env === "cartpole") {
    const px = (x: number) => ((x + 2.4) / 4.8) * (width - 40) + 20;
    const trackY = height * 0.7;
    const cartX = px(scene.cart_x);
    const scale = height * 0.4;
    const endX = cartX + (scene.pole_end_x - scene.cart_x) * scale;
    const endY = trackY - 12 - scene.pole_end_y * scale;
    return [
      { kind: "line", points: [[0, trackY], [width, trackY]] },
      {
        kind: "rect",
        points: [[cartX - 20, trackY - 12], [cartX + 20, trackY + 12]],
      },
      { kind: "line", points: [[cartX, trackY - 12], [endX, endY]] },
    ];
  }
  const px = (x: number) => ((x + 1.2) / 1.8) * (width - 40) + 20;
  const py = (y: number) => height * 0.55 - y * height * 0.3;
  const hill: Array<[number, number]> = [];
  for (let i = 0; i < 100; i++) {
    const x = -1.2 + (i * 1.8) / 99;
    hill.push([px(x), py(Math.sin(3 * x))]);
  }
  return [
    { kind: "polyline", points: hill },
    { kind: "circle", points: [[px(scene.car_x), py(scene.car_y) - 10]] },
    {
      kind: "line",
      points: [[px(0.5), py(Math.sin(1.5))], [px(0.5), py(Math.sin(1.5)) - 30]],
    },
  ];
}

export function drawScene(
  ctx: CanvasRenderingContext2D, scene: Scene, width: number, height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = "#222";
  ctx.lineWidth = 2;
  for (const seg of scenePrimitives(scene, width, height)) {
    ctx.beginPath();
    if (seg.kind === "rect") {
      const [[x0, y0], [x1, y1]] = seg.points;
      ctx.strokeRect(x0, y0, x1 - x0, y1 - y0);
      continue;
    }
    if (seg.kind === "circle") {
      const [[x, y]] = seg.points;
      ctx.arc(x, y, 8, 0, 2 * Math.PI);
    } else {
      seg.points.forEach(([x, y], i) =>
        i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y));
    }
    ctx.stroke();
  }
}
