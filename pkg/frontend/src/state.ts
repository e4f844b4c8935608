/**
 * Viewer state and its URL serialization.
 *
 * The full view state round-trips through a query string so any view is
 * shareable as a link. The UI holds no voxel data: everything displayed is
 * re-fetched from the service from this state.
 */

import { SliceFrame, Vec3, frameFromQuery, frameToQuery, identityFrame } from "./frame.js";

export type Colormap = "gray" | "hot";
export type Tool = "navigate" | "polygon" | "ellipse" | "manual-register";

export interface LayerDisplay {
  window: number;
  level: number;
  colormap: Colormap;
}

export interface ViewState {
  imageId: string | null;
  overlayId: string | null;
  /** axial, sagittal, coronal, oblique */
  paneFrames: [SliceFrame, SliceFrame, SliceFrame, SliceFrame];
  crosshair: Vec3;
  base: LayerDisplay;
  overlay: LayerDisplay;
  overlayOpacity: number;
  /** tx, ty, tz, rx, ry, rz (mm, rad) */
  manualPose: [number, number, number, number, number, number];
  frameIndex: number;
  tool: Tool;
}

export function defaultViewState(): ViewState {
  return {
    imageId: null,
    overlayId: null,
    paneFrames: [
      identityFrame(),
      identityFrame(),
      identityFrame(),
      identityFrame(),
    ],
    crosshair: [0, 0, 0],
    base: { window: 1, level: 0.5, colormap: "gray" },
    overlay: { window: 1, level: 0.5, colormap: "hot" },
    overlayOpacity: 0.5,
    manualPose: [0, 0, 0, 0, 0, 0],
    frameIndex: 1,
    tool: "navigate",
  };
}

const COLORMAPS: Colormap[] = ["gray", "hot"];
const TOOLS: Tool[] = ["navigate", "polygon", "ellipse", "manual-register"];

function numberList(text: string, n: number, what: string): number[] {
  const values = text.split(",").map(Number);
  if (values.length !== n || values.some((v) => !Number.isFinite(v))) {
    throw new Error(`${what} must hold ${n} finite numbers`);
  }
  return values;
}

export function encodeViewState(state: ViewState): string {
  const params = new URLSearchParams();
  if (state.imageId !== null) params.set("image", state.imageId);
  if (state.overlayId !== null) params.set("overlay", state.overlayId);
  state.paneFrames.forEach((frame, i) => {
    params.set(`pane${i}`, frameToQuery(frame));
  });
  params.set("crosshair", state.crosshair.join(","));
  params.set("w", String(state.base.window));
  params.set("l", String(state.base.level));
  params.set("cmap", state.base.colormap);
  params.set("ow", String(state.overlay.window));
  params.set("ol", String(state.overlay.level));
  params.set("ocmap", state.overlay.colormap);
  params.set("alpha", String(state.overlayOpacity));
  params.set("pose", state.manualPose.join(","));
  params.set("t", String(state.frameIndex));
  params.set("tool", state.tool);
  return params.toString();
}

export function decodeViewState(query: string): ViewState {
  const params = new URLSearchParams(query);
  const state = defaultViewState();
  state.imageId = params.get("image");
  state.overlayId = params.get("overlay");
  for (let i = 0; i < 4; i++) {
    const text = params.get(`pane${i}`);
    if (text !== null) state.paneFrames[i] = frameFromQuery(text);
  }
  const crosshair = params.get("crosshair");
  if (crosshair !== null) {
    state.crosshair = numberList(crosshair, 3, "crosshair") as Vec3;
  }
  if (params.has("w")) state.base.window = Number(params.get("w"));
  if (params.has("l")) state.base.level = Number(params.get("l"));
  if (params.has("ow")) state.overlay.window = Number(params.get("ow"));
  if (params.has("ol")) state.overlay.level = Number(params.get("ol"));
  const cmap = params.get("cmap");
  if (cmap !== null) {
    if (!COLORMAPS.includes(cmap as Colormap)) {
      throw new Error(`unknown colormap ${cmap}`);
    }
    state.base.colormap = cmap as Colormap;
  }
  const ocmap = params.get("ocmap");
  if (ocmap !== null) {
    if (!COLORMAPS.includes(ocmap as Colormap)) {
      throw new Error(`unknown colormap ${ocmap}`);
    }
    state.overlay.colormap = ocmap as Colormap;
  }
  if (params.has("alpha")) {
    const alpha = Number(params.get("alpha"));
    if (!(alpha >= 0 && alpha <= 1)) {
      throw new Error("overlay opacity must be in [0, 1]");
    }
    state.overlayOpacity = alpha;
  }
  const pose = params.get("pose");
  if (pose !== null) {
    state.manualPose = numberList(pose, 6, "pose") as ViewState["manualPose"];
  }
  if (params.has("t")) state.frameIndex = Number(params.get("t"));
  const tool = params.get("tool");
  if (tool !== null) {
    if (!TOOLS.includes(tool as Tool)) throw new Error(`unknown tool ${tool}`);
    state.tool = tool as Tool;
  }
  return state;
}
