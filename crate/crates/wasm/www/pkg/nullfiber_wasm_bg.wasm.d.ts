/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_path_free: (a: number, b: number) => void;
export const leafPath: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const path_data: (a: number) => [number, number];
export const path_note: (a: number) => [number, number];
export const path_width: (a: number) => number;
export const sampleField: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
export const weightKernelDim: (a: number, b: number, c: number, d: number) => [number, number, number];
export const weightPath: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
