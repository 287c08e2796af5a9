// Canvas renderer: draws the sprite list from buildRenderModel.

import { Sprite } from "./play.js";

const COLORS: Record<string, string> = {
  floor: "#f4ead8",
  X: "#8d7b68",
  O: "#e8b13c",
  T: "#c8443c",
  D: "#b9c4cc",
  P: "#4a4a58",
  S: "#58854f",
  "pot:empty": "#4a4a58",
  "pot:filling": "#5d5d74",
  "pot:cooking": "#8a4a22",
  "pot:ready": "#d2691e",
  "item:onion": "#e8b13c",
  "item:tomato": "#c8443c",
  "item:dish": "#eef1f4",
  "item:soup": "#d2691e",
  "player:human": "#2f6fb2",
  "player:ai": "#7a3fa0",
};

export const CELL = 48;

export function drawSprites(ctx: CanvasRenderingContext2D, sprites: Sprite[]) {
  for (const layer of ["floor", "object", "item", "player"] as const) {
    for (const s of sprites) {
      if (s.layer !== layer) continue;
      const x = s.col * CELL;
      const y = s.row * CELL;
      if (layer === "floor" || layer === "object") {
        ctx.fillStyle = COLORS[s.glyph] ?? "#999";
        ctx.fillRect(x, y, CELL, CELL);
        ctx.strokeStyle = "#00000022";
        ctx.strokeRect(x, y, CELL, CELL);
        if (["O", "T", "D", "P", "S"].includes(s.glyph)) {
          ctx.fillStyle = "#fff";
          ctx.font = "bold 16px sans-serif";
          ctx.textAlign = "center";
          ctx.fillText(s.glyph, x + CELL / 2, y + CELL / 2 + 6);
        }
      } else if (layer === "item") {
        ctx.fillStyle = COLORS[s.glyph] ?? "#d2691e";
        ctx.beginPath();
        ctx.arc(x + CELL / 2, y + CELL / 2, CELL / 4, 0, Math.PI * 2);
        ctx.fill();
        if (s.label) {
          ctx.fillStyle = "#fff";
          ctx.font = "bold 12px sans-serif";
          ctx.textAlign = "center";
          ctx.fillText(s.label, x + CELL / 2, y + CELL / 2 + 4);
        }
      } else {
        ctx.fillStyle = COLORS[s.glyph] ?? "#333";
        ctx.beginPath();
        ctx.arc(x + CELL / 2, y + CELL / 2, CELL / 2.6, 0, Math.PI * 2);
        ctx.fill();
        if (s.label) {
          ctx.fillStyle = "#fff";
          ctx.font = "11px sans-serif";
          ctx.textAlign = "center";
          ctx.fillText(s.label, x + CELL / 2, y + CELL / 2 + 4);
        }
      }
    }
  }
}
