/** App assembly: maze editor, PixCol and NDSP tabs over one session. */

import { WorkbenchClient } from "./api.js";
import { MazeEditor, drawMaze } from "./mazeEditor.js";
import { NdspView } from "./ndsp.js";
import { PixColView, drawPixels } from "./pixcol.js";
import { basisFromRows, initialBasis } from "./projection.js";
import { ViewState } from "./state.js";

const api = new WorkbenchClient(
	(window as { WORKBENCH_URL?: string }).WORKBENCH_URL ?? "",
);
const state = new ViewState(api, () => {
	window.alert("classification changed on the server; reloading it");
	if (state.classificationId) {
		void state.loadClassification(state.classificationId).then(refreshViews);
	}
});

function el<T extends HTMLElement>(id: string): T {
	const node = document.getElementById(id);
	if (!node) throw new Error(`missing #${id}`);
	return node as T;
}

let editor: MazeEditor | null = null;
let pixcol: PixColView | null = null;
let ndsp: NdspView | null = null;

function refreshViews(): void {
	if (state.classification && pixcol) pixcol.setDocument(state.classification);
	if (state.classification && ndsp) ndsp.draw();
}

async function saveClassEdit(mutate: () => void): Promise<void> {
	mutate();
	await state.saveClassification();
	refreshViews();
}

async function loadClassificationIntoViews(cid: string): Promise<void> {
	const doc = await state.loadClassification(cid);
	const trace = state.trace;
	if (!trace) return;
	const tensor = await api.layerTensor(state.session, trace, state.layer);
	const [c, h, w] = tensor.dims;
	// flatten (C,H,W) -> points (H*W, C)
	const points = new Float32Array(h * w * c);
	for (let ch = 0; ch < c; ch++) {
		for (let k = 0; k < h * w; k++) {
			points[k * c + ch] = tensor.data[ch * h * w + k];
		}
	}
	pixcol?.setDocument(doc);
	const served = await api.projection(state.session, cid, 0, 0);
	ndsp = new NdspView(
		el<HTMLCanvasElement>("ndsp-canvas"),
		{
			onReassignToNew: (pointIds) => {
				void state
					.enqueueMutation(() => api.reassign(state.session, cid, pointIds, "new"))
					.then((env) => {
						state.classification = env.document;
						state.rev = env.rev;
						refreshViews();
					});
			},
			onToggleHidden: (classId, hidden) => {
				void saveClassEdit(() => state.setClassHidden(classId, hidden));
			},
		},
		c,
		served.basis.length ? basisFromRows(served.basis) : initialBasis(c),
	);
	ndsp.setData(doc, points, c);
	renderClassList();
}

function renderClassList(): void {
	const doc = state.classification;
	const list = el<HTMLElement>("class-list");
	list.innerHTML = "";
	if (!doc) return;
	for (const [id, entry] of Object.entries(doc.classes)) {
		const row = document.createElement("div");
		row.className = "class-row";
		const swatch = document.createElement("span");
		swatch.className = "swatch";
		swatch.style.background = entry.color;
		const name = document.createElement("span");
		name.textContent = `${id} ${entry.label || "(unlabeled)"}`;
		const hide = document.createElement("input");
		hide.type = "checkbox";
		hide.checked = entry.hidden;
		hide.title = "hidden";
		hide.addEventListener("change", () => {
			void saveClassEdit(() => state.setClassHidden(Number(id), hide.checked));
		});
		row.append(swatch, name, hide);
		list.append(row);
	}
}

async function boot(): Promise<void> {
	await state.init();
	const maze = await api.generateMaze(state.session, 42, 15);
	state.maze = maze;

	editor = new MazeEditor(
		api,
		state.session,
		el<HTMLCanvasElement>("maze-canvas"),
		el<HTMLElement>("action-bars"),
		el<HTMLElement>("maze-status"),
		maze,
		(trace) => {
			state.trace = trace;
		},
	);
	drawMaze(el<HTMLCanvasElement>("maze-canvas"), maze);
	await editor.refresh();

	el<HTMLButtonElement>("btn-generate").addEventListener("click", () => {
		const seed = Number(el<HTMLInputElement>("maze-seed").value) || 0;
		const size = Number(el<HTMLInputElement>("maze-size").value) || 15;
		void api.generateMaze(state.session, seed, size).then(async (m) => {
			if (editor) {
				editor.maze = m;
				await editor.refresh();
			}
		});
	});
	el<HTMLButtonElement>("btn-remove-cheese").addEventListener("click", () => {
		void editor?.removeCheese();
	});
	for (const tool of ["wall", "mouse", "cheese"] as const) {
		el<HTMLInputElement>(`tool-${tool}`).addEventListener("change", () => {
			if (editor) editor.tool = tool;
		});
	}
	el<HTMLSelectElement>("saliency-target").addEventListener("change", (e) => {
		const v = (e.target as HTMLSelectElement).value;
		if (editor) {
			editor.saliencyTarget = v === "off" ? null : v;
			void editor.refresh();
		}
	});

	pixcol = new PixColView(
		el<HTMLCanvasElement>("pixcol-canvas"),
		el<HTMLCanvasElement>("pixcol-reference"),
		el<HTMLElement>("pixcol-status"),
		{
			onColor: (classId, color) => {
				void saveClassEdit(() => state.setClassColor(classId, color));
			},
			onLabel: (classId, label) => {
				void saveClassEdit(() => state.setClassLabel(classId, label));
			},
		},
	);

	el<HTMLButtonElement>("btn-cluster").addEventListener("click", () => {
		void (async () => {
			if (!editor) return;
			state.layer = el<HTMLSelectElement>("cluster-layer").value;
			const fwd = await api.forward(state.session, editor.maze.id, [state.layer]);
			state.trace = fwd.trace;
			const method = el<HTMLSelectElement>("cluster-method").value;
			const params =
				method === "kmeans"
					? { k: Number(el<HTMLInputElement>("cluster-k").value) || 8, seed: 0 }
					: { count: Number(el<HTMLInputElement>("cluster-k").value) || 8 };
			const job = await api.startCluster(state.session, fwd.trace, state.layer, method, params);
			el<HTMLElement>("cluster-status").textContent = "clustering...";
			const done = await api.waitForJob(state.session, job);
			el<HTMLElement>("cluster-status").textContent = done.status;
			if (done.status === "done" && done.classification) {
				await loadClassificationIntoViews(done.classification);
				// reference pane: the observation, so colors can be grounded
				const obs = buildObservationImage();
				if (obs) drawPixels(el<HTMLCanvasElement>("pixcol-reference"), obs, 64, 64);
			}
		})();
	});

	el<HTMLButtonElement>("btn-ndsp-toggle").addEventListener("click", () => {
		if (!ndsp) return;
		ndsp.setRunning(!ndsp.isRunning);
		el<HTMLButtonElement>("btn-ndsp-toggle").textContent = ndsp.isRunning
			? "pause rotation"
			: "resume rotation";
	});
	el<HTMLButtonElement>("btn-ndsp-newclass").addEventListener("click", () => {
		ndsp?.reassignSelectionToNewClass();
	});
	el<HTMLButtonElement>("btn-undo").addEventListener("click", () => {
		const cid = state.classificationId;
		if (!cid) return;
		void state
			.enqueueMutation(() => api.undo(state.session, cid))
			.then((env) => {
				state.classification = env.document;
				state.rev = env.rev;
				refreshViews();
				renderClassList();
			});
	});

	function buildObservationImage(): Uint8ClampedArray | null {
		if (!editor) return null;
		const m = editor.maze;
		const out = new Uint8ClampedArray(64 * 64 * 4);
		// draw via the same painter the editor uses, at observation scale
		const tmp = document.createElement("canvas");
		tmp.width = 64;
		tmp.height = 64;
		drawMaze(tmp, m);
		const ctx = tmp.getContext("2d");
		if (!ctx) return null;
		out.set(ctx.getImageData(0, 0, 64, 64).data);
		return out;
	}

	for (const tab of ["maze", "pixcol", "ndsp"]) {
		el<HTMLButtonElement>(`tab-${tab}`).addEventListener("click", () => {
			for (const other of ["maze", "pixcol", "ndsp"]) {
				el<HTMLElement>(`panel-${other}`).style.display =
					other === tab ? "flex" : "none";
			}
		});
	}
}

void boot();
