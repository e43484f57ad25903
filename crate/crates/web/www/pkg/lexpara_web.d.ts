/* tslint:disable */
/* eslint-disable */

/**
 * The toy world with its trained models.
 */
export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Decodes `source` under comma-separated positive and negative phrases
     * and a space-separated list of tokens banned in first position.
     */
    decode(source: string, positive: string, negative: string, banned_first: string): string;
    constructor(seed: number);
    /**
     * Candidate pool, realized constraint sets and one paraphrase per set.
     */
    paraphrase(index: number, system_id: number): string;
    referenceCount(): number;
    /**
     * `{source, reference}` for reference `index`.
     */
    reference(index: number): string | undefined;
}

/**
 * Modified BLEU (×100) and unigram precision of one sentence pair.
 */
export function bleu(reference: string, paraphrase: string): string;

/**
 * Names of the 37 constraint-selection systems, as a JSON array.
 */
export function systemNames(): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly bleu: (a: number, b: number, c: number, d: number) => [number, number];
    readonly demo_decode: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number];
    readonly demo_new: (a: number) => [number, number, number];
    readonly demo_paraphrase: (a: number, b: number, c: number) => [number, number, number, number];
    readonly demo_reference: (a: number, b: number) => [number, number];
    readonly demo_referenceCount: (a: number) => number;
    readonly systemNames: () => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
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
