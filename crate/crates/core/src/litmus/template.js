// Generated by emme. Do not edit.
/*---
description: {{DESCRIPTION}}
features: [SharedArrayBuffer, Atomics]
flags: [CanBlockIsFalse]
---*/
// EXPECTED-OUTPUTS-BEGIN
{{EXPECTED_HEADER}}
// EXPECTED-OUTPUTS-END

const EXPECTED = [
{{EXPECTED_ARRAY}}
];
const AGENTS = {{AGENT_COUNT}};
const sab = new SharedArrayBuffer({{BUFFER_BYTES}});
{{AGENTS}}
$262.agent.broadcast(sab);

const reports = [];
while (reports.length < AGENTS) {
  const r = $262.agent.getReport();
  if (r === null) {
    $262.agent.sleep(1);
  } else {
    reports.push(r);
  }
}
const items = reports.join(";").split(";").filter(function (s) { return s !== ""; }).sort();
const outcome = items.length === 0 ? "(none)" : items.join(";");
print(outcome);
if (EXPECTED.indexOf(outcome) < 0) {
  throw new Test262Error("outcome " + outcome + " is not a valid execution");
}
