"""Network interchange files, tree dumps, and the versioned benchmark CSV.

The network file is JSON: ``variables`` is an ordered list of
``{"name", "states"}`` (states are labels; order fixes state indices),
``arcs`` is a list of ``[parent, child]`` name pairs whose order fixes CPT
parent order, ``cpts`` maps a variable name to row-major values (parents in
declared arc order, child varying fastest), and optional ``evidence`` maps
a variable name to a likelihood vector.

CSV rows carry a schema tag so report tooling can refuse foreign files.
Text tables are for humans; the CSV is the contract.
"""

from __future__ import annotations

import csv
import io
import json

import numpy as np

from bnbench.compile import JoinTree
from bnbench.network import BayesNet, NetworkError
from bnbench.potentials import Variable, make_potential

CSV_SCHEMA = "bnbench-rows-1"

ROW_FIELDS = [
    "trial",
    "seed",
    "n",
    "c1",
    "c2",
    "m",
    "p",
    "evidence_vars",
    "arch",
    "tree",
    "tree_nodes",
    "adds",
    "mults",
    "divs",
    "total",
    "input_fpn",
    "evidence_fpn",
    "clique_fpn",
    "separator_fpn",
    "output_fpn",
    "total_fpn",
    "peak_fpn",
]


def network_to_dict(net: BayesNet, evidence: dict = None, state_labels: dict = None) -> dict:
    state_labels = state_labels or {}

    def states(v):
        return state_labels.get(v.id, ["s%d" % k for k in range(v.cardinality)])

    doc = {
        "variables": [
            {"name": v.name, "states": states(v)} for v in net.variables
        ],
        "arcs": [[net.var(p).name, net.var(c).name] for p, c in net.arcs],
        "cpts": {
            net.var(v.id).name: [float(x) for x in net.cpts[v.id].values.reshape(-1)]
            for v in net.variables
        },
    }
    if evidence:
        doc["evidence"] = {
            net.var(vid).name: [float(x) for x in np.asarray(vec).reshape(-1)]
            for vid, vec in sorted(evidence.items())
        }
    return doc


def network_from_dict(doc: dict):
    try:
        specs = doc["variables"]
        arcs_by_name = doc.get("arcs", [])
        cpts_raw = doc["cpts"]
    except (KeyError, TypeError) as exc:
        raise NetworkError("network file missing required key: %s" % exc)
    variables = []
    index = {}
    for i, item in enumerate(specs):
        name = item["name"]
        states = item["states"]
        card = len(states) if isinstance(states, list) else int(states)
        if name in index:
            raise NetworkError("duplicate variable name %r" % name)
        index[name] = i
        variables.append(Variable(i, name, card))
    arcs = []
    for pair in arcs_by_name:
        p, c = pair
        if p not in index or c not in index:
            raise NetworkError("arc %r references unknown variable" % (pair,))
        arcs.append((index[p], index[c]))
    parents = {i: [] for i in index.values()}
    for p, c in arcs:
        parents[c].append(p)
    cpts = {}
    for v in variables:
        if v.name not in cpts_raw:
            raise NetworkError("no CPT for variable %r" % v.name)
        domain = [variables[j] for j in parents[v.id]] + [v]
        cpts[v.id] = make_potential(domain, cpts_raw[v.name])
    net = BayesNet(variables, arcs, cpts)
    evidence = {}
    for name, vec in (doc.get("evidence") or {}).items():
        if name not in index:
            raise NetworkError("evidence on unknown variable %r" % name)
        evidence[index[name]] = np.asarray(vec, dtype=np.float64)
    return net, evidence


def save_network(path: str, net: BayesNet, evidence: dict = None, state_labels: dict = None):
    with open(path, "w") as fp:
        json.dump(network_to_dict(net, evidence, state_labels), fp, indent=2, sort_keys=True)
        fp.write("\n")


def load_network(path: str):
    with open(path) as fp:
        try:
            doc = json.load(fp)
        except json.JSONDecodeError as exc:
            raise NetworkError(
                "%s: line %d column %d: %s" % (path, exc.lineno, exc.colno, exc.msg)
            )
    return network_from_dict(doc)


def tree_dump(tree: JoinTree, names: dict = None) -> str:
    """Deterministic text rendering used by golden tests and `compile`."""
    names = names or {}

    def label(dom):
        return "{%s}" % ",".join(str(names.get(v, v)) for v in dom)

    lines = [
        "%s tree: %d nodes, %d edges"
        % (tree.kind, len(tree.nodes), len(tree.edges()))
    ]
    for n in sorted(tree.nodes):
        entry = "node %d: %s statespace=%d" % (n, label(tree.nodes[n]), tree.statespace(n))
        if tree.assignments.get(n):
            entry += " potentials=%s" % (sorted(tree.assignments[n]),)
        lines.append(entry)
    for u, v in tree.edges():
        lines.append(
            "edge (%d,%d): separator %s statespace=%d"
            % (u, v, label(tree.separator(u, v)), tree.sep_statespace(u, v))
        )
    return "\n".join(lines) + "\n"


def rows_to_csv(rows: list) -> str:
    buf = io.StringIO()
    buf.write("# %s\n" % CSV_SCHEMA)
    writer = csv.DictWriter(buf, fieldnames=ROW_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k, "") for k in ROW_FIELDS})
    return buf.getvalue()


def write_rows(path: str, rows: list):
    with open(path, "w") as fp:
        fp.write(rows_to_csv(rows))


def read_rows(path: str) -> list:
    with open(path) as fp:
        first = fp.readline().strip()
        if first != "# %s" % CSV_SCHEMA:
            raise NetworkError("%s: expected schema tag %r, found %r" % (path, CSV_SCHEMA, first))
        reader = csv.DictReader(fp)
        if reader.fieldnames != ROW_FIELDS:
            raise NetworkError("%s: column set does not match %s" % (path, CSV_SCHEMA))
        return [dict(row) for row in reader]
