"""The three propagation architectures behind one interface.

All engines run on a compiled, potential-assigned JoinTree and charge a
single OpCounter.  Shared conventions that the counting targets pin down:

* Working tables live on the full node domain and start as marked identity
  potentials.  Loading the first factor into a marked table is a free copy
  (numerically a product with ones); every later factor costs one
  multiplication per node configuration.  Initialization is counted.
* A node whose table is still marked when it must send stays silent: the
  message would be vacuous, so nothing is counted, Hugin separators keep
  their identity mark, and the receiver skips the product.
* Root selection, child ordering, tie-breaks, and fold orders are all fixed,
  so counters are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

from bnbench.compile import CompileResult, JoinTree, compile_structures
from bnbench.counting import OpCounter
from bnbench.network import BayesNet
from bnbench.potentials import (
    Potential,
    divide,
    embed,
    identity_over,
    marginalize,
    multiply,
    normalize,
)


class EngineError(ValueError):
    """Unusable tree/potential combination for a propagation run."""


@dataclass
class EngineResult:
    arch: str
    tree_kind: str
    singleton_marginals: dict
    node_marginals: dict
    counter: OpCounter
    messages: dict


def _orient(tree: JoinTree, root: int):
    """Rooted traversal orders: preorder, postorder, parent and child maps."""
    parent = {root: None}
    children = {}
    preorder = []
    stack = [root]
    while stack:
        n = stack.pop()
        preorder.append(n)
        kids = [q for q in tree.adj[n] if q != parent[n]]
        children[n] = kids
        for q in reversed(kids):
            parent[q] = n
            stack.append(q)
    postorder = []
    stack = [(root, False)]
    while stack:
        n, done = stack.pop()
        if done:
            postorder.append(n)
            continue
        stack.append((n, True))
        for q in reversed(children[n]):
            stack.append((q, False))
    return preorder, postorder, parent, children


def _absorb(table: Potential, pot: Potential, cards: dict, counter: OpCounter) -> Potential:
    """Fold ``pot`` into a node table: free copy when still marked, else product."""
    if table.is_identity:
        return embed(pot, table.domain, cards)
    return multiply(table, pot, counter)


def _check_assignments(tree: JoinTree, potentials):
    placed = sorted(i for idxs in tree.assignments.values() for i in idxs)
    if placed != list(range(len(potentials))):
        raise EngineError(
            "tree assignments cover %d of %d input potentials"
            % (len(placed), len(potentials))
        )


def _init_tables(tree: JoinTree, potentials, counter: OpCounter) -> dict:
    tables = {}
    for n in sorted(tree.nodes):
        t = identity_over(tree.nodes[n], tree.cards)
        for i in tree.assignments.get(n, ()):
            t = _absorb(t, potentials[i], tree.cards, counter)
        tables[n] = t
    return tables


def _edge_key(a, b):
    return (a, b) if a < b else (b, a)


def _designated(tree: JoinTree, x: int) -> int:
    """Smallest-state-space node containing x; ties by lowest id."""
    holders = [n for n in sorted(tree.nodes) if x in tree.nodes[n]]
    if not holders:
        raise EngineError("variable %r absent from every tree node" % x)
    return min(holders, key=lambda n: (tree.statespace(n), n))


def _best_separator(tree: JoinTree, x: int):
    """Smallest separator containing x as (state space, edge), or None."""
    best = None
    for u, v in tree.edges():
        if x in tree.separator(u, v):
            cand = (tree.sep_statespace(u, v), (u, v))
            if best is None or cand < best:
                best = cand
    return best


def _targets(tree: JoinTree, targets):
    if targets is None:
        return sorted(tree.cards)
    return sorted(set(targets))


def ls_run(tree: JoinTree, potentials, targets=None, counter=None) -> EngineResult:
    """Lauritzen-Spiegelhalter propagation.

    Inward: each non-root node marginalizes to its separator, the inward
    neighbor multiplies the message in, and the sender divides its own table
    by the message.  Outward: plain marginalize-and-multiply, no divisions.
    Singleton marginals come from a smallest containing clique.
    """
    counter = counter if counter is not None else OpCounter()
    _check_assignments(tree, potentials)
    targets = _targets(tree, targets)
    tables = _init_tables(tree, potentials, counter)
    root = tree.root()
    preorder, postorder, parent, children = _orient(tree, root)

    for n in postorder:
        if n == root:
            continue
        t = tables[n]
        if t.is_identity:
            continue
        p = parent[n]
        msg = marginalize(t, tree.separator(n, p), counter)
        tables[p] = _absorb(tables[p], msg, tree.cards, counter)
        tables[n] = divide(t, msg, counter)

    for n in preorder:
        for c in children[n]:
            t = tables[n]
            if t.is_identity:
                continue
            msg = marginalize(t, tree.separator(n, c), counter)
            tables[c] = _absorb(tables[c], msg, tree.cards, counter)

    marginals = {}
    for x in targets:
        source = tables[_designated(tree, x)]
        marginals[x] = normalize(marginalize(source, (x,), counter))
    return EngineResult("ls", tree.kind, marginals, tables, counter, {})


def hugin_run(tree: JoinTree, potentials, targets=None, counter=None, on_step=None) -> EngineResult:
    """Hugin propagation with separator registers.

    Every separator holds its last message; a sender forwards the quotient
    of the new message by the stored one (free while the store is still
    identity).  One outward special case: a non-singleton leaf whose whole
    domain equals its separator is served by the separator register itself,
    so neither the quotient nor the receiving product is performed.
    Singleton marginals come from a smallest separator containing the
    variable when one exists, else from a smallest clique.

    ``on_step(phase, sender, receiver, tables, store)`` is invoked after
    every message for invariant instrumentation.
    """
    counter = counter if counter is not None else OpCounter()
    _check_assignments(tree, potentials)
    targets = _targets(tree, targets)
    tables = _init_tables(tree, potentials, counter)
    root = tree.root()
    preorder, postorder, parent, children = _orient(tree, root)
    store = {}

    for n in postorder:
        if n == root:
            continue
        t = tables[n]
        if t.is_identity:
            continue
        p = parent[n]
        key = _edge_key(n, p)
        msg = marginalize(t, tree.separator(n, p), counter)
        old = store.get(key)
        quotient = msg if old is None else divide(msg, old, counter)
        store[key] = msg
        tables[p] = _absorb(tables[p], quotient, tree.cards, counter)
        if on_step is not None:
            on_step("inward", n, p, tables, store)

    for n in preorder:
        for c in children[n]:
            t = tables[n]
            if t.is_identity:
                continue
            key = _edge_key(n, c)
            sep = tree.separator(n, c)
            msg = marginalize(t, sep, counter)
            if tree.degree(c) == 1 and tree.nodes[c] == sep and len(sep) > 1:
                store[key] = msg
                tables[c] = msg
            else:
                old = store.get(key)
                quotient = msg if old is None else divide(msg, old, counter)
                store[key] = msg
                tables[c] = _absorb(tables[c], quotient, tree.cards, counter)
            if on_step is not None:
                on_step("outward", n, c, tables, store)

    marginals = {}
    for x in targets:
        best = _best_separator(tree, x)
        if best is not None and store.get(best[1]) is not None:
            source = store[best[1]]
        else:
            source = tables[_designated(tree, x)]
        marginals[x] = normalize(marginalize(source, (x,), counter))
    return EngineResult("hugin", tree.kind, marginals, tables, counter, store)


def ss_run(tree: JoinTree, potentials, targets=None, counter=None) -> EngineResult:
    """Shenoy-Shafer demand-driven propagation.  Never divides.

    Each requested target demands the messages into its designated node
    (the smallest node containing it); message computation recurses and is
    memoized, so unrequested messages are never produced.  A message from r
    toward s folds the stored messages from r's other neighbors (ascending
    neighbor id) and finally r's combined own potential, then marginalizes
    onto the separator.  Node marginals fold all incoming messages plus the
    own potential.  Input potentials are never touched.

    Singleton extraction: when some separator containing the variable is
    strictly smaller than the designated node, the product of that
    separator's two directed messages is marginalized instead; on a binary
    join tree with singleton nodes this never fires and the singleton's own
    node marginal is already the answer.
    """
    counter = counter if counter is not None else OpCounter()
    _check_assignments(tree, potentials)
    targets = _targets(tree, targets)
    own_cache = {}
    messages = {}

    def own(n):
        if n not in own_cache:
            idxs = tree.assignments.get(n, ())
            if not idxs:
                own_cache[n] = None
            else:
                prod = potentials[idxs[0]]
                for i in idxs[1:]:
                    prod = multiply(prod, potentials[i], counter)
                own_cache[n] = prod
        return own_cache[n]

    def message(r, s):
        stack = [(r, s)]
        while stack:
            a, b = stack[-1]
            if (a, b) in messages:
                stack.pop()
                continue
            pending = [(q, a) for q in tree.adj[a] if q != b and (q, a) not in messages]
            if pending:
                stack.extend(pending)
                continue
            factors = [
                messages[(q, a)]
                for q in tree.adj[a]
                if q != b and messages[(q, a)] is not None
            ]
            o = own(a)
            if o is not None:
                factors.append(o)
            if not factors:
                messages[(a, b)] = None
            else:
                prod = factors[0]
                for f in factors[1:]:
                    prod = multiply(prod, f, counter)
                sep = set(tree.separator(a, b))
                keep = [w for w in prod.domain if w in sep]
                messages[(a, b)] = marginalize(prod, keep, counter)
            stack.pop()
        return messages[(r, s)]

    node_marginals = {}

    def rule2(n):
        if n not in node_marginals:
            factors = [m for m in (message(q, n) for q in tree.adj[n]) if m is not None]
            o = own(n)
            if o is not None:
                factors.append(o)
            if not factors:
                node_marginals[n] = identity_over(tree.nodes[n], tree.cards)
            else:
                prod = factors[0]
                for f in factors[1:]:
                    prod = multiply(prod, f, counter)
                node_marginals[n] = prod
        return node_marginals[n]

    sep_products = {}
    marginals = {}
    for x in targets:
        designated = _designated(tree, x)
        node_marg = rule2(designated)
        source = None
        best = _best_separator(tree, x)
        if best is not None and best[0] < tree.statespace(designated):
            u, v = best[1]
            if (u, v) not in sep_products:
                parts = [m for m in (message(u, v), message(v, u)) if m is not None]
                if not parts:
                    sep_products[(u, v)] = None
                elif len(parts) == 1:
                    sep_products[(u, v)] = parts[0]
                else:
                    sep_products[(u, v)] = multiply(parts[0], parts[1], counter)
            prod = sep_products[(u, v)]
            if prod is not None and x in prod.domain:
                source = prod
        if source is None:
            source = node_marg
        if x in source.domain:
            marginals[x] = normalize(marginalize(source, (x,), counter))
        else:
            marginals[x] = normalize(identity_over((x,), tree.cards))
    return EngineResult("ss", tree.kind, marginals, node_marginals, counter, messages)


def run_all(net: BayesNet, evidence: dict, targets=None, comp: CompileResult = None) -> dict:
    """LS and Hugin on the junction tree, SS on the binary join tree.

    One compilation (one elimination order) feeds all three runs, each with
    a fresh counter.
    """
    if comp is None:
        comp = compile_structures(net, evidence)
    return {
        "ls": ls_run(comp.junction, comp.potentials, targets),
        "hugin": hugin_run(comp.junction, comp.potentials, targets),
        "ss": ss_run(comp.binary, comp.potentials, targets),
    }
