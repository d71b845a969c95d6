/* tslint:disable */
/* eslint-disable */

/**
 * Rows of equal width flattened into one buffer, plus a note describing why
 * a trace stopped early (empty when it ran to completion).
 */
export class Path {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly data: Float64Array;
    readonly note: string;
    readonly width: number;
}

export function leafPath(spec: string, x: number, y: number, h: number, steps: number): Path;

export function sampleField(spec: string, x_min: number, x_max: number, y_min: number, y_max: number, nx: number, ny: number): Float64Array;

export function weightKernelDim(spec: string, x: number, y: number): number;

export function weightPath(spec: string, x: number, y: number, coeffs: Float64Array, h: number, steps: number): Path;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_path_free: (a: number, b: number) => void;
    readonly leafPath: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly path_data: (a: number) => [number, number];
    readonly path_note: (a: number) => [number, number];
    readonly path_width: (a: number) => number;
    readonly sampleField: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly weightKernelDim: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly weightPath: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
