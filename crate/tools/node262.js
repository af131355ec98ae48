// Minimal $262.agent host for node: `node tools/node262.js test.js`.
// Agents are worker threads; reports travel through a shared buffer so the
// main thread can poll them synchronously.
"use strict";
const { Worker } = require("worker_threads");
const fs = require("fs");

const SLOTS = 64;
const SLOT_BYTES = 4096;

const PRELUDE = `
const { parentPort } = require("worker_threads");
let rep = null;
globalThis.print = (s) => console.log(String(s));
globalThis.$262 = { agent: {
  receiveBroadcast(cb) {
    parentPort.once("message", (m) => { rep = m.rep; cb(m.sab); });
  },
  report(s) {
    const head = new Int32Array(rep, 0, ${SLOTS} + 1);
    const i = Atomics.add(head, 0, 1);
    const bytes = new TextEncoder().encode(String(s));
    const lenAt = new Int32Array(rep, 4 * (${SLOTS} + 1) + i * ${SLOT_BYTES}, 1);
    new Uint8Array(rep, 4 * (${SLOTS} + 2) + i * ${SLOT_BYTES}, bytes.length).set(bytes);
    lenAt[0] = bytes.length;
    Atomics.store(head, i + 1, 1);
  },
  leaving() {},
  sleep(ms) { Atomics.wait(new Int32Array(new SharedArrayBuffer(4)), 0, 0, ms); },
} };
`;

const rep = new SharedArrayBuffer(4 * (SLOTS + 2) + SLOTS * SLOT_BYTES);
const head = new Int32Array(rep, 0, SLOTS + 1);
const workers = [];
let taken = 0;

globalThis.print = (s) => console.log(String(s));
globalThis.Test262Error = class Test262Error extends Error {};
globalThis.$262 = { agent: {
  start(src) { workers.push(new Worker(PRELUDE + src, { eval: true })); },
  broadcast(sab) { for (const w of workers) w.postMessage({ sab, rep }); },
  getReport() {
    if (taken >= SLOTS || Atomics.load(head, taken + 1) === 0) return null;
    const len = new Int32Array(rep, 4 * (SLOTS + 1) + taken * SLOT_BYTES, 1)[0];
    const bytes = new Uint8Array(rep, 4 * (SLOTS + 2) + taken * SLOT_BYTES, len).slice();
    taken += 1;
    return new TextDecoder().decode(bytes);
  },
  sleep(ms) { Atomics.wait(new Int32Array(new SharedArrayBuffer(4)), 0, 0, ms); },
} };

(0, eval)(fs.readFileSync(process.argv[2], "utf8"));
