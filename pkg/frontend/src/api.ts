/**
 * Typed client for the slice-rendering service.
 *
 * All voxel math happens server-side; the client only builds requests and
 * decodes JSON. `fetch` is injectable so request construction is testable
 * without a network.
 */

import { SliceFrame, frameToQuery } from "./frame.js";
import { Colormap } from "./state.js";

export interface ImageMeta {
  id: string;
  size: number[];
  spacing: number[];
  origin: number[];
  orientation: number[][];
  value_range: [number, number];
  frames: number;
}

export interface SliceRequest {
  frame?: SliceFrame;
  frameIndex?: number;
  window?: number;
  level?: number;
  colormap?: Colormap;
  thickness?: number;
  overlayId?: string;
  overlayPose?: number[];
  overlayColormap?: Colormap;
  overlayOpacity?: number;
}

export interface RegisterRequest {
  fixedId: string;
  movingId: string;
  transform?: "rigid" | "ffd";
  metric?: "ncc" | "nmi" | "ssd";
  x0?: number[];
  options?: { [key: string]: number };
}

export interface RegisterResult {
  params: number[];
  matrix: number[][] | null;
  cost_initial: number;
  cost_final: number;
  iterations: number;
  warped_id: string;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function expectOk(response: Response): Promise<Response> {
  if (!response.ok) {
    let message = `HTTP ${response.status}`;
    try {
      const body = await response.json();
      if (body?.detail?.message) message = body.detail.message;
    } catch {
      /* non-JSON error body; keep the status text */
    }
    throw new Error(message);
  }
  return response;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  /** Relative slice URL with all render parameters; also used as cache key. */
  sliceUrl(imageId: string, request: SliceRequest): string {
    const params = new URLSearchParams();
    if (request.frame) params.set("frame", frameToQuery(request.frame));
    if (request.frameIndex !== undefined) {
      params.set("frame_index", String(request.frameIndex));
    }
    if (request.window !== undefined) params.set("window", String(request.window));
    if (request.level !== undefined) params.set("level", String(request.level));
    if (request.colormap) params.set("colormap", request.colormap);
    if (request.thickness !== undefined) {
      params.set("thickness", String(request.thickness));
    }
    if (request.overlayId) {
      params.set("overlay", request.overlayId);
      if (request.overlayPose) {
        params.set("overlay_pose", request.overlayPose.join(","));
      }
      if (request.overlayColormap) {
        params.set("overlay_colormap", request.overlayColormap);
      }
      if (request.overlayOpacity !== undefined) {
        params.set("overlay_opacity", String(request.overlayOpacity));
      }
    }
    return `${this.baseUrl}/images/${imageId}/slice?${params.toString()}`;
  }

  async loadImageFromPath(path: string): Promise<ImageMeta> {
    const response = await this.fetchImpl(`${this.baseUrl}/images`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ path }),
    });
    return (await expectOk(response)).json();
  }

  async uploadImage(file: File): Promise<ImageMeta> {
    const form = new FormData();
    form.append("file", file);
    const response = await this.fetchImpl(`${this.baseUrl}/images`, {
      method: "POST",
      body: form,
    });
    return (await expectOk(response)).json();
  }

  async fetchSlice(imageId: string, request: SliceRequest): Promise<Blob> {
    const response = await this.fetchImpl(this.sliceUrl(imageId, request));
    return (await expectOk(response)).blob();
  }

  async frameMatrix(imageId: string, frame?: SliceFrame): Promise<number[][]> {
    const params = new URLSearchParams();
    if (frame) params.set("frame", frameToQuery(frame));
    const query = params.toString();
    const url = `${this.baseUrl}/images/${imageId}/frame-matrix` +
      (query ? `?${query}` : "");
    const response = await this.fetchImpl(url);
    const body = await (await expectOk(response)).json();
    return body.matrix;
  }

  async createPolygonMask(
    imageId: string,
    frame: SliceFrame,
    vertices: Array<[number, number]>,
  ): Promise<{ mask_id: string; sum: number }> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/images/${imageId}/mask`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ frame, polygon: vertices }),
      },
    );
    return (await expectOk(response)).json();
  }

  async createEllipseMask(
    imageId: string,
    frame: SliceFrame,
    center: [number, number],
    radii: [number, number],
    angle = 0,
  ): Promise<{ mask_id: string; sum: number }> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/images/${imageId}/mask`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ frame, ellipse: { center, radii, angle } }),
      },
    );
    return (await expectOk(response)).json();
  }

  maskExportUrl(maskId: string): string {
    return `${this.baseUrl}/images/${maskId}/export?format=mhd`;
  }

  async register(request: RegisterRequest): Promise<RegisterResult> {
    const body: { [key: string]: unknown } = {
      fixed_id: request.fixedId,
      moving_id: request.movingId,
    };
    if (request.transform) body.transform = request.transform;
    if (request.metric) body.metric = request.metric;
    if (request.x0) body.x0 = request.x0;
    if (request.options) body.options = request.options;
    const response = await this.fetchImpl(`${this.baseUrl}/register`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return (await expectOk(response)).json();
  }
}
