/** Interactive maze editor with live policy readouts.
 *
 * Click toggles wall/path, the entity buttons place the mouse or the
 * cheese (or remove the cheese for no-goal probes). Every edit runs a
 * forward pass and refreshes the 5-way action probability bars;
 * the saliency overlay redraws for the selected target.
 */

import { WorkbenchClient } from "./api.js";
import type { MazeInfo, SaliencyResult } from "./types.js";

export const PALETTE: Record<string, [number, number, number]> = {
	"#": [0x3c, 0x2a, 0x14],
	".": [0xbf, 0xa6, 0x6a],
	C: [0xff, 0xe9, 0x3e],
	M: [0x80, 0x80, 0x80],
};

const ACTION_ORDER = ["UP", "DOWN", "LEFT", "RIGHT", "NOOP"];

export type EditTool = "wall" | "mouse" | "cheese";

export function cellFromEvent(
	canvas: HTMLCanvasElement,
	size: number,
	e: MouseEvent,
): [number, number] {
	const rect = canvas.getBoundingClientRect();
	const col = Math.floor(((e.clientX - rect.left) / rect.width) * size);
	const row = Math.floor(((e.clientY - rect.top) / rect.height) * size);
	return [row, col];
}

export function drawMaze(
	canvas: HTMLCanvasElement,
	maze: MazeInfo,
	saliency: SaliencyResult | null = null,
): void {
	const ctx = canvas.getContext("2d");
	if (!ctx) return;
	const n = maze.size;
	const cell = Math.floor(Math.min(canvas.width, canvas.height) / n);
	let maxAbs = 1e-12;
	if (saliency) for (const v of saliency.values) maxAbs = Math.max(maxAbs, Math.abs(v));
	ctx.clearRect(0, 0, canvas.width, canvas.height);
	for (let r = 0; r < n; r++) {
		for (let c = 0; c < n; c++) {
			const [cr, cg, cb] = PALETTE[maze.rows[r][c]] ?? PALETTE["#"];
			ctx.fillStyle = `rgb(${cr},${cg},${cb})`;
			ctx.fillRect(c * cell, r * cell, cell, cell);
		}
	}
	if (saliency) {
		// saliency field is 64x64 over the observation; scale to cells
		const [sh, sw] = saliency.shape;
		const px = (n * cell) / sw;
		for (let y = 0; y < sh; y++) {
			for (let x = 0; x < sw; x++) {
				const v = saliency.values[y * sw + x];
				const a = (Math.abs(v) / maxAbs) * 0.7;
				if (a < 0.02) continue;
				ctx.fillStyle = `rgba(0,136,55,${a.toFixed(3)})`;
				ctx.fillRect(x * px, y * px, Math.ceil(px), Math.ceil(px));
			}
		}
	}
}

export function drawActionBars(
	container: HTMLElement,
	actions: Record<string, number>,
): void {
	const dist = actions;
	container.innerHTML = "";
	for (const name of ACTION_ORDER) {
		const p = dist[name] ?? 0;
		const row = document.createElement("div");
		row.className = "action-row";
		const label = document.createElement("span");
		label.textContent = `${name} ${(p * 100).toFixed(1)}%`;
		const bar = document.createElement("div");
		bar.className = "action-bar";
		bar.style.width = `${Math.round(p * 200)}px`;
		row.append(label, bar);
		container.append(row);
	}
}

export class MazeEditor {
	tool: EditTool = "wall";
	saliencyTarget: string | null = null;
	private saliency: SaliencyResult | null = null;

	constructor(
		private api: WorkbenchClient,
		private session: string,
		private canvas: HTMLCanvasElement,
		private bars: HTMLElement,
		private statusLine: HTMLElement,
		public maze: MazeInfo,
		private onForward: (trace: string) => void = () => {},
	) {
		canvas.addEventListener("click", (e) => void this.onClick(e));
	}

	private async onClick(e: MouseEvent): Promise<void> {
		const [row, col] = cellFromEvent(this.canvas, this.maze.size, e);
		try {
			if (this.tool === "wall") {
				const kind = this.maze.rows[row][col] === "#" ? "FREE" : "BLOCKED";
				this.maze = await this.api.setCell(this.session, this.maze.id, row, col, kind);
			} else {
				this.maze = await this.api.placeEntity(
					this.session, this.maze.id, this.tool, row, col,
				);
			}
			this.statusLine.textContent = this.maze.validity.spanning_tree
				? "maze is a spanning tree"
				: `edited maze: ${this.maze.validity.problems.join("; ") || "custom"}`;
			await this.refresh();
		} catch (err) {
			this.statusLine.textContent = String(err);
		}
	}

	async removeCheese(): Promise<void> {
		this.maze = await this.api.removeCheese(this.session, this.maze.id);
		await this.refresh();
	}

	/** Forward pass + optional saliency, then redraw. */
	async refresh(): Promise<void> {
		const fwd = await this.api.forward(this.session, this.maze.id, []);
		drawActionBars(this.bars, fwd.actions);
		this.onForward(fwd.trace);
		this.saliency = this.saliencyTarget
			? await this.api.saliency(this.session, this.maze.id, this.saliencyTarget)
			: null;
		drawMaze(this.canvas, this.maze, this.saliency);
	}
}
