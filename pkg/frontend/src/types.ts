/** Payload shapes of the workbench HTTP API. */

export interface ClassEntry {
	label: string;
	color: string; // "#RRGGBB"
	hidden: boolean;
}

export interface ClassificationDoc {
	version: number;
	layer: string;
	shape: [number, number, number]; // [H, W, C]
	assignment: number[];
	classes: Record<string, ClassEntry>;
}

export interface ClassificationEnvelope {
	rev: number;
	document: ClassificationDoc;
}

export interface MazeInfo {
	id: string;
	size: number;
	rows: string[]; // size strings over {#, ., M, C}
	mouse: [number, number];
	cheese: [number, number] | null;
	validity: {
		connected: boolean;
		spanning_tree: boolean;
		rooms: number;
		corridors: number;
		problems: string[];
	};
}

export interface ForwardResult {
	trace: string;
	cached: boolean;
	logits: number[];
	value: number;
	actions: Record<string, number>;
}

export interface JobStatus {
	job: string;
	status: "queued" | "running" | "done" | "error" | "cancelled";
	progress: number;
	classification: string | null;
	error: string | null;
}

export interface SaliencyResult {
	target: string;
	reduction: string;
	shape: [number, number];
	values: number[];
}

export interface ProjectionResult {
	basis: number[][]; // d x 2
	points: number[][]; // n x 2
}

export interface LayerInfo {
	name: string;
	kind: string;
	shape: number[];
}

export interface NetworkInfo {
	input_shape: number[];
	actions: number;
	layers: LayerInfo[];
	weights_checksum: string;
}
