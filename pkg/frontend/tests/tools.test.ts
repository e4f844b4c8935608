import { describe, expect, it } from "vitest";

import { EllipseTool, PolygonTool } from "../src/tools.js";

describe("PolygonTool", () => {
  it("disables submission below three vertices", () => {
    const tool = new PolygonTool();
    tool.addVertex([0, 0]);
    tool.addVertex([1, 0]);
    expect(tool.canSubmit()).toBe(false);
    tool.addVertex([1, 1]);
    expect(tool.canSubmit()).toBe(true);
  });

  it("undo removes the last vertex", () => {
    const tool = new PolygonTool();
    tool.addVertex([0, 0]);
    tool.addVertex([1, 0]);
    tool.undo();
    expect(tool.getVertices()).toEqual([[0, 0]]);
  });

  it("returned vertices are copies", () => {
    const tool = new PolygonTool();
    tool.addVertex([0, 0]);
    const vertices = tool.getVertices();
    vertices[0][0] = 99;
    expect(tool.getVertices()).toEqual([[0, 0]]);
  });
});

describe("EllipseTool", () => {
  it("inscribes the ellipse in the dragged rectangle", () => {
    const tool = new EllipseTool();
    tool.beginDrag([2, 2]);
    tool.updateDrag([8, 6]);
    expect(tool.getShape()).toEqual({
      center: [5, 4],
      radii: [3, 2],
      angle: 0,
    });
    expect(tool.canSubmit()).toBe(true);
  });

  it("rejects a degenerate drag", () => {
    const tool = new EllipseTool();
    tool.beginDrag([2, 2]);
    tool.updateDrag([2, 6]); // zero x radius
    expect(tool.canSubmit()).toBe(false);
  });

  it("cannot submit before any drag", () => {
    expect(new EllipseTool().canSubmit()).toBe(false);
  });
});
