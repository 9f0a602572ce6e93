/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_engine_free: (a: number, b: number) => void;
export const engine_catalog: (a: number) => [number, number];
export const engine_graph: (a: number, b: number, c: number) => [number, number, number, number];
export const engine_new: () => number;
export const engine_rank: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const engine_reformulate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __externref_table_alloc: () => number;
export const __wbindgen_start: () => void;
