/**
 * Manual annotation tools: polygon and ellipse, drawn in the world
 * coordinates of the active slice plane. The tools only collect geometry;
 * rasterization happens server-side.
 */

export type PlanePoint = [number, number];

export class PolygonTool {
  private vertices: PlanePoint[] = [];

  addVertex(point: PlanePoint): void {
    this.vertices.push([point[0], point[1]]);
  }

  undo(): void {
    this.vertices.pop();
  }

  clear(): void {
    this.vertices = [];
  }

  getVertices(): PlanePoint[] {
    return this.vertices.map((v) => [v[0], v[1]]);
  }

  /** Submission requires at least three vertices. */
  canSubmit(): boolean {
    return this.vertices.length >= 3;
  }
}

export interface EllipseShape {
  center: PlanePoint;
  radii: [number, number];
  angle: number;
}

export class EllipseTool {
  private start: PlanePoint | null = null;
  private current: PlanePoint | null = null;

  beginDrag(point: PlanePoint): void {
    this.start = [point[0], point[1]];
    this.current = [point[0], point[1]];
  }

  updateDrag(point: PlanePoint): void {
    if (this.start === null) return;
    this.current = [point[0], point[1]];
  }

  clear(): void {
    this.start = null;
    this.current = null;
  }

  /** Axis-aligned ellipse inscribed in the dragged rectangle. */
  getShape(): EllipseShape | null {
    if (this.start === null || this.current === null) return null;
    const center: PlanePoint = [
      (this.start[0] + this.current[0]) / 2,
      (this.start[1] + this.current[1]) / 2,
    ];
    const radii: [number, number] = [
      Math.abs(this.current[0] - this.start[0]) / 2,
      Math.abs(this.current[1] - this.start[1]) / 2,
    ];
    return { center, radii, angle: 0 };
  }

  /** Both radii must be strictly positive to submit. */
  canSubmit(): boolean {
    const shape = this.getShape();
    return shape !== null && shape.radii[0] > 0 && shape.radii[1] > 0;
  }
}
