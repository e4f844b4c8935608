/**
 * Browser entry point: a 2x2 multi-planar viewer driven entirely by the
 * slice service. Panes: axial, sagittal, coronal, oblique. The crosshair is
 * shared by all panes; dragging an arm tilts the other panes about it.
 */

import { ApiClient, ImageMeta, SliceRequest } from "./api.js";
import { Vec3, frameColumn, makeFrame, tiltFrame } from "./frame.js";
import { PolygonTool, EllipseTool } from "./tools.js";
import {
  ViewState,
  decodeViewState,
  defaultViewState,
  encodeViewState,
} from "./state.js";

const PANE_NAMES = ["axial", "sagittal", "coronal", "oblique"] as const;

/** Canonical pane frames through a point: axial z, sagittal x, coronal y. */
function canonicalFrames(point: Vec3): ViewState["paneFrames"] {
  return [
    makeFrame([1, 0, 0], [0, 1, 0], [0, 0, 1], point),
    makeFrame([0, 1, 0], [0, 0, 1], [1, 0, 0], point),
    makeFrame([1, 0, 0], [0, 0, 1], [0, -1, 0], point),
    makeFrame([1, 0, 0], [0, 1, 0], [0, 0, 1], point),
  ];
}

class ViewerApp {
  private state: ViewState;
  private meta: ImageMeta | null = null;
  private readonly panes: HTMLCanvasElement[] = [];
  private readonly aborters: (AbortController | null)[] = [null, null, null, null];
  private readonly polygon = new PolygonTool();
  private readonly ellipse = new EllipseTool();
  private readonly status: HTMLElement;

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
  ) {
    this.state = window.location.hash.length > 1
      ? decodeViewState(window.location.hash.slice(1))
      : defaultViewState();
    this.status = document.createElement("div");
    this.status.className = "status";
    this.buildLayout();
  }

  private buildLayout(): void {
    const grid = document.createElement("div");
    grid.className = "pane-grid";
    for (const name of PANE_NAMES) {
      const wrapper = document.createElement("div");
      wrapper.className = "pane";
      const label = document.createElement("span");
      label.textContent = name;
      const canvas = document.createElement("canvas");
      canvas.width = 320;
      canvas.height = 320;
      canvas.addEventListener("pointerdown", (ev) =>
        this.onPanePointerDown(this.panes.length - 1, ev));
      wrapper.append(label, canvas);
      grid.append(wrapper);
      this.panes.push(canvas);
    }
    const controls = this.buildControls();
    this.root.append(grid, controls, this.status);
  }

  private buildControls(): HTMLElement {
    const bar = document.createElement("div");
    bar.className = "controls";

    const fileInput = document.createElement("input");
    fileInput.type = "file";
    fileInput.addEventListener("change", async () => {
      const file = fileInput.files?.[0];
      if (!file) return;
      await this.run(async () => {
        this.meta = await this.api.uploadImage(file);
        this.state.imageId = this.meta.id;
        const [lo, hi] = this.meta.value_range;
        this.state.base.window = hi - lo || 1;
        this.state.base.level = (hi + lo) / 2;
        this.state.crosshair = [
          this.meta.origin[0] + (this.meta.spacing[0] * (this.meta.size[0] - 1)) / 2,
          this.meta.origin[1] + (this.meta.spacing[1] * (this.meta.size[1] - 1)) / 2,
          this.meta.origin[2] + (this.meta.spacing[2] * (this.meta.size[2] - 1)) / 2,
        ];
        this.state.paneFrames = canonicalFrames(this.state.crosshair);
        this.refreshAll();
      });
    });

    const windowSlider = document.createElement("input");
    windowSlider.type = "range";
    windowSlider.min = "1";
    windowSlider.max = "100";
    windowSlider.addEventListener("input", () => {
      if (!this.meta) return;
      const [lo, hi] = this.meta.value_range;
      this.state.base.window = ((hi - lo) * Number(windowSlider.value)) / 50 || 1;
      this.refreshAll();
    });

    const opacitySlider = document.createElement("input");
    opacitySlider.type = "range";
    opacitySlider.min = "0";
    opacitySlider.max = "100";
    opacitySlider.addEventListener("input", () => {
      this.state.overlayOpacity = Number(opacitySlider.value) / 100;
      this.refreshAll();
    });

    const toolSelect = document.createElement("select");
    for (const tool of ["navigate", "polygon", "ellipse", "manual-register"]) {
      const option = document.createElement("option");
      option.value = tool;
      option.textContent = tool;
      toolSelect.append(option);
    }
    toolSelect.addEventListener("change", () => {
      this.state.tool = toolSelect.value as ViewState["tool"];
      this.polygon.clear();
      this.ellipse.clear();
      this.syncUrl();
    });

    const submitMask = document.createElement("button");
    submitMask.textContent = "submit mask";
    submitMask.addEventListener("click", () => this.submitMask());

    const refine = document.createElement("button");
    refine.textContent = "refine registration";
    refine.addEventListener("click", () => this.refineRegistration());

    const exportFrame = document.createElement("button");
    exportFrame.textContent = "export frame matrix";
    exportFrame.addEventListener("click", async () => {
      if (!this.state.imageId) return;
      await this.run(async () => {
        const matrix = await this.api.frameMatrix(
          this.state.imageId as string,
          this.state.paneFrames[3],
        );
        const blob = new Blob([JSON.stringify(matrix)], {
          type: "application/json",
        });
        const link = document.createElement("a");
        link.href = URL.createObjectURL(blob);
        link.download = "slice-frame.json";
        link.click();
      });
    });

    bar.append(fileInput, windowSlider, opacitySlider, toolSelect,
               submitMask, refine, exportFrame);
    return bar;
  }

  private onPanePointerDown(pane: number, ev: PointerEvent): void {
    if (!this.state.imageId) return;
    const world = this.canvasToWorld(pane, ev.offsetX, ev.offsetY);
    if (this.state.tool === "polygon") {
      this.polygon.addVertex(this.worldToPlane(pane, world));
      this.setStatus(`polygon: ${this.polygon.getVertices().length} vertices`);
      return;
    }
    if (this.state.tool === "ellipse") {
      this.ellipse.beginDrag(this.worldToPlane(pane, world));
      return;
    }
    if (this.state.tool === "manual-register") {
      this.state.manualPose[0] += world[0] - this.state.crosshair[0];
      this.state.manualPose[1] += world[1] - this.state.crosshair[1];
      this.refreshAll();
      return;
    }
    // navigate: move the crosshair; shift-drag tilts the sibling panes
    if (ev.shiftKey) {
      const angle = (ev.offsetX / 320 - 0.5) * 0.2;
      for (let other = 0; other < 4; other++) {
        if (other === pane || angle === 0) continue;
        this.state.paneFrames[other] = tiltFrame(
          this.state.paneFrames[other], 0, angle, this.state.crosshair);
      }
      if (angle !== 0) this.refreshAll();
      return;
    }
    this.state.crosshair = world;
    for (let i = 0; i < 4; i++) {
      const frame = this.state.paneFrames[i];
      this.state.paneFrames[i] = makeFrame(
        frameColumn(frame, 0), frameColumn(frame, 1), frameColumn(frame, 2),
        world);
    }
    this.refreshAll();
  }

  /** Canvas pixel to world mm on the pane's plane (unit canvas scale). */
  private canvasToWorld(pane: number, x: number, y: number): Vec3 {
    const frame = this.state.paneFrames[pane];
    const a1 = frameColumn(frame, 0);
    const a2 = frameColumn(frame, 1);
    const p = frameColumn(frame, 3);
    const u = x - 160;
    const v = y - 160;
    return [
      p[0] + u * a1[0] + v * a2[0],
      p[1] + u * a1[1] + v * a2[1],
      p[2] + u * a1[2] + v * a2[2],
    ];
  }

  private worldToPlane(pane: number, world: Vec3): [number, number] {
    const frame = this.state.paneFrames[pane];
    const a1 = frameColumn(frame, 0);
    const a2 = frameColumn(frame, 1);
    const p = frameColumn(frame, 3);
    const d: Vec3 = [world[0] - p[0], world[1] - p[1], world[2] - p[2]];
    return [
      d[0] * a1[0] + d[1] * a1[1] + d[2] * a1[2],
      d[0] * a2[0] + d[1] * a2[1] + d[2] * a2[2],
    ];
  }

  private async submitMask(): Promise<void> {
    if (!this.state.imageId) return;
    const imageId = this.state.imageId;
    const frame = this.state.paneFrames[3];
    if (this.state.tool === "polygon") {
      if (!this.polygon.canSubmit()) {
        this.setStatus("polygon needs at least 3 vertices");
        return;
      }
      await this.run(async () => {
        const result = await this.api.createPolygonMask(
          imageId, frame, this.polygon.getVertices());
        this.setStatus(`mask ${result.mask_id}: ${result.sum} voxels — ` +
          this.api.maskExportUrl(result.mask_id));
        this.polygon.clear();
      });
      return;
    }
    if (this.state.tool === "ellipse" && this.ellipse.canSubmit()) {
      const shape = this.ellipse.getShape();
      if (!shape) return;
      await this.run(async () => {
        const result = await this.api.createEllipseMask(
          imageId, frame, shape.center, shape.radii, shape.angle);
        this.setStatus(`mask ${result.mask_id}: ${result.sum} voxels`);
        this.ellipse.clear();
      });
    }
  }

  private async refineRegistration(): Promise<void> {
    if (!this.state.imageId || !this.state.overlayId) return;
    const fixedId = this.state.imageId;
    const movingId = this.state.overlayId;
    await this.run(async () => {
      const result = await this.api.register({
        fixedId,
        movingId,
        transform: "rigid",
        metric: "ncc",
        x0: [...this.state.manualPose],
      });
      this.state.manualPose =
        result.params as ViewState["manualPose"];
      this.setStatus(`registered: cost ${result.cost_initial.toFixed(4)} -> ` +
        result.cost_final.toFixed(4));
      this.refreshAll();
    });
  }

  /** Re-fetch every pane; per-pane fetches are cancellable, latest wins. */
  private refreshAll(): void {
    this.syncUrl();
    for (let i = 0; i < 4; i++) void this.refreshPane(i);
  }

  private async refreshPane(pane: number): Promise<void> {
    if (!this.state.imageId) return;
    this.aborters[pane]?.abort();
    const aborter = new AbortController();
    this.aborters[pane] = aborter;
    const request: SliceRequest = {
      frame: this.state.paneFrames[pane],
      frameIndex: this.state.frameIndex,
      window: this.state.base.window,
      level: this.state.base.level,
      colormap: this.state.base.colormap,
    };
    if (this.state.overlayId) {
      request.overlayId = this.state.overlayId;
      request.overlayPose = [...this.state.manualPose];
      request.overlayColormap = this.state.overlay.colormap;
      request.overlayOpacity = this.state.overlayOpacity;
    }
    const url = this.api.sliceUrl(this.state.imageId, request);
    try {
      const response = await fetch(url, { signal: aborter.signal });
      if (!response.ok) throw new Error(`HTTP ${response.status}`);
      const bitmap = await createImageBitmap(await response.blob());
      if (aborter.signal.aborted) return;
      const ctx = this.panes[pane].getContext("2d");
      if (!ctx) return;
      ctx.clearRect(0, 0, 320, 320);
      ctx.imageSmoothingEnabled = false;
      ctx.drawImage(bitmap, 0, 0, 320, 320);
      this.drawCrosshair(ctx);
    } catch (error) {
      if ((error as Error).name !== "AbortError") {
        this.setStatus(String(error));
      }
    }
  }

  private drawCrosshair(ctx: CanvasRenderingContext2D): void {
    ctx.strokeStyle = "rgba(255, 220, 0, 0.8)";
    ctx.beginPath();
    ctx.moveTo(160, 0);
    ctx.lineTo(160, 320);
    ctx.moveTo(0, 160);
    ctx.lineTo(320, 160);
    ctx.stroke();
  }

  private syncUrl(): void {
    window.history.replaceState(null, "", `#${encodeViewState(this.state)}`);
  }

  private setStatus(text: string): void {
    this.status.textContent = text;
  }

  private async run(action: () => Promise<void>): Promise<void> {
    try {
      await action();
    } catch (error) {
      this.setStatus(String(error));
    }
  }
}

export function start(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const api = new ApiClient(window.location.origin.replace(/\/$/, ""));
  new ViewerApp(api, root);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  start();
}
