"""Exhaustive cross-module verification sweeps.

Each sweep enumerates a universe of instances (algebras, ideal pairs,
actions, products) and checks every structural statement on every instance,
returning a report with concrete witnesses for anything that fails.  These
back the `verify-all` command and the acceptance suite.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import catalog, core, families, ideals, products, words
from .core import AlgebraTable, order_structure, validate
from .errors import BudgetExceeded, CongruenceUndefined, PropertyFalsified
from .families import EnumerationTask, SweepReport, enumerate_algebras
from .ideals import IdealSet, all_ideals, ideal_masks, members_of
from .parallel import pmap
from .products import ActionMap, enumerate_operations, semidirect
from .words import Word, word_dot


def _all_algebras(max_size: int, **budget) -> list[AlgebraTable]:
    out: list[AlgebraTable] = []
    for n in range(1, max_size + 1):
        out.extend(enumerate_algebras(EnumerationTask(n, "L"), **budget).tables)
    return out


# -- ideal lattice sweep (sizes <= 5) --------------------------------------


def _lattice_checks(table: AlgebraTable) -> tuple[list, dict]:
    failures: list = []
    stats = {"congruence_failures": 0, "join_pairs": 0}
    lattice = all_ideals(table)  # distributivity + L-validation happen inside
    k = len(lattice.ideals)
    for p in range(k - 1):
        P = lattice.ideals[p]
        if ideals.is_prime_ideal(lattice, P) != ideals.is_prime_by_meets(lattice, P):
            failures.append(("prime_route_disagree", table.flat, P.sorted_members()))
    for j in range(k):
        J = lattice.ideals[j]
        try:
            ideals.quotient(table, J)
        except CongruenceUndefined:
            stats["congruence_failures"] += 1
            continue
        for i in range(k):
            I = lattice.ideals[i]
            stats["join_pairs"] += 1
            if not ideals.verify_join_membership(lattice, I, J):
                failures.append(("join_membership", table.flat, I.sorted_members(), J.sorted_members()))
    rep = validate(table)
    order = order_structure(table)
    n = table.n
    if rep.is_ckl:
        families.tail_analysis(table)  # asserts tails of CKL algebras are ideals
        # connected components of the Hasse diagram away from the unit
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for a, b in order.hasse_edges:
            if a != 0 and b != 0:
                parent[find(a)] = find(b)
        comps: dict[int, set] = {}
        for x in range(1, n):
            comps.setdefault(find(x), set()).add(x)
        for comp in comps.values():
            if not ideals.is_ideal(table, comp | {0}).ok:
                failures.append(("component_not_ideal", table.flat, tuple(sorted(comp))))
    if rep.is_ckl and rep.is_bounded and n >= 2:
        sub, members = families.glivenko_peel(table)
        inner = {
            frozenset(members[i] for i in m.members)
            for m in all_ideals(sub).ideals
        }
        outer = {i.members for i in lattice.ideals if i.members <= set(members)}
        expected = outer | {frozenset(members)}
        if inner != expected:
            failures.append(("glivenko_ideals", table.flat))
    if rep.is_hilbert:
        minimal = sorted(order.minimal_elements)
        for m_i in minimal:
            p_i = frozenset().union(
                *(order.upset(m) for m in minimal if m != m_i)
            ) if len(minimal) > 1 else frozenset({0})
            for P in lattice.ideals:
                if not P.is_proper or not p_i <= P.members:
                    continue
                rest = [x for x in range(n) if x not in P.members]
                if order.is_chain(rest) and not ideals.is_prime_ideal(lattice, P):
                    failures.append(("hilbert_pi_prime", table.flat, P.sorted_members()))
    return failures, stats


def ideal_lattice_sweep(max_size: int = 5, **budget) -> SweepReport:
    """Distributivity, the ideal L-algebra, both primality routes, the join
    membership law, and the per-class ideal facts, on every algebra up to
    the given size.  Congruence failures surface in the stats, never pass
    silently."""
    per_size: dict = {}
    failures: list = []
    for n in range(1, max_size + 1):
        tables = enumerate_algebras(EnumerationTask(n, "L"), **budget).tables
        cong = 0
        joins = 0
        for t in tables:
            fails, stats = _lattice_checks(t)
            failures.extend(fails)
            cong += stats["congruence_failures"]
            joins += stats["join_pairs"]
        per_size[n] = {
            "algebras": len(tables),
            "join_pairs": joins,
            "congruence_failures": cong,
        }
    return SweepReport("ideal_lattice", per_size, tuple(failures))


# -- semidirect product sweep (components <= 4) ----------------------------


def _downset_laws(action: ActionMap, prod) -> list:
    failures = []
    X, Y = action.base, action.actor
    tX, tY = X.table, Y.table
    alg = prod.algebra
    n = alg.n
    ordP = order_structure(alg)
    ordX = order_structure(X)
    ordY = order_structure(Y)
    for x in range(X.n):
        for u in range(Y.n):
            p = prod.index(x, u)
            down = ordP.downset(p)
            expect = {
                prod.index(y, v)
                for v in ordY.downset(u)
                for y in ordX.downset(action.rho[tY[u][v]][x])
            }
            if down != expect:
                failures.append(("downset_part1", x, u))
            if alg.table[prod.index(0, u)][prod.index(x, u)] != prod.index(x, 0):
                failures.append(("downset_part4", x, u))
    for u in range(Y.n):
        p = prod.index(0, u)
        down = ordP.downset(p)
        expect = {prod.index(y, v) for y in range(X.n) for v in ordY.downset(u)}
        if down != expect:
            failures.append(("downset_part2_set", u))
        for q in down:
            y, v = prod.carrier[q]
            if alg.table[p][q] != prod.index(y, tY[u][v]):
                failures.append(("downset_part2_sigma", u, y, v))
    for x in range(X.n):
        p = prod.index(x, 0)
        down = ordP.downset(p)
        expect = {
            prod.index(y, v)
            for v in range(Y.n)
            for y in ordX.downset(action.rho[v][x])
        }
        if down != expect:
            failures.append(("downset_part3_set", x))
        for q in down:
            y, v = prod.carrier[q]
            if alg.table[p][q] != prod.index(tX[action.rho[v][x]][y], v):
                failures.append(("downset_part3_sigma", x, y, v))
    return failures


def _product_action_checks(action: ActionMap) -> list:
    failures = []
    X, Y = action.base, action.actor
    try:
        prod = semidirect(action)
    except PropertyFalsified as exc:
        return [("semidirect_build", str(exc))]
    alg = prod.algebra
    lat = all_ideals(alg)
    latX, latY = all_ideals(X), all_ideals(Y)
    gensP = ideals.gen_masks(alg)
    gensX = ideals.gen_masks(X)
    gensY = ideals.gen_masks(Y)

    # every ideal splits, satisfies the quotient characterization, and the
    # kernel-product law (X x {1}).K = K_X x ker(rho^{K_X})
    full_mask = prod.pair_mask(range(X.n), [0])
    XK = lat.ideals[lat.index_of(members_of(full_mask, alg.n))]
    for K in lat.ideals:
        try:
            KX, KY = products.project_ideal(prod, K)
        except (PropertyFalsified, ideals.NotAnIdeal) as exc:
            failures.append(("ideal_split", K.sorted_members(), str(exc)))
            continue
        if not products.quotient_equivalence(action, K):
            failures.append(("quotient_equivalence", K.sorted_members()))
        ker = products.ker_rho_mod(action, KX)
        left = ideals.ideal_product(lat, XK, K)
        want = prod.pair_mask(KX.members, ker.members)
        if left.mask != want:
            failures.append(("kernel_product_law", K.sorted_members()))

    # generated-ideal law for every generator pair
    for x in range(X.n):
        for u in range(Y.n):
            gm = gensP[prod.index(x, u)]
            KX_m, KY_m = prod.split_mask(gm)
            if ideals.mask_of(KY_m, Y.n) != gensY[u]:
                failures.append(("generated_actor_component", x, u))
            if gensX[x] & ~ideals.mask_of(KX_m, X.n) != 0:
                failures.append(("generated_base_component", x, u))
            if prod.pair_mask(KX_m, KY_m) != gm:
                failures.append(("generated_split", x, u))

    # product-component bounds for every ideal pair of the product
    for K1 in lat.ideals:
        k1x, k1y = prod.split_mask(K1.mask)
        a = latX.index_of(ideals.mask_of(k1x, X.n))
        ay = latY.index_of(ideals.mask_of(k1y, Y.n))
        for K2 in lat.ideals:
            k2x, k2y = prod.split_mask(K2.mask)
            b = latX.index_of(ideals.mask_of(k2x, X.n))
            by = latY.index_of(ideals.mask_of(k2y, Y.n))
            L = lat.ideals[lat.product[lat.index_of(K1)][lat.index_of(K2)]]
            lx, ly = prod.split_mask(L.mask)
            bound_x = latX.ideals[latX.product[a][b]].members
            bound_y = latY.ideals[latY.product[ay][by]].members
            if not (lx <= bound_x and ly <= bound_y):
                failures.append(("product_component_bounds", K1.sorted_members(), K2.sorted_members()))

    # pair conditions match direct ideal tests for every component pair
    for I in latX.ideals:
        for U in latY.ideals:
            try:
                products.check_pair_conditions(action, I, U, product=prod)
            except PropertyFalsified as exc:
                failures.append(("pair_conditions", I.sorted_members(), U.sorted_members(), str(exc)))

    counts = products.ideal_count_formulas(action)
    if not counts.ok:
        failures.append(("ideal_counts", counts.to_json_dict()))
    spec_rep = products.spec_decomposition(action)
    if not spec_rep.ok:
        failures.append(("spec_decomposition", spec_rep.witness))
    if not spec_rep.remark_formula_ok:
        failures.append(("spec_open_image_formula", spec_rep.witness))

    failures.extend(_downset_laws(action, prod))

    if action.at_least("KL"):
        if set(products.rho_ideal_masks(action)) != set(ideal_masks(X)):
            failures.append(("kl_rho_ideals",))
    products.rho_ideals(action)  # sublattice + distributivity asserted inside

    if action.at_least("CKL"):
        sym_rep = products.symmetric_ideal_bijection(action)
        if not sym_rep.ok:
            failures.append(("symmetric_bijection", sym_rep.to_json_dict()))
        sym = products.symmetric_semidirect(action)
        for L in all_ideals(sym.algebra).ideals:
            try:
                products.project_ideal(sym, L)
            except (PropertyFalsified, ideals.NotAnIdeal) as exc:
                failures.append(("symmetric_split", L.sorted_members(), str(exc)))
    return failures


def _pair_task(args) -> tuple[int, list]:
    X, Y, size_cap = args
    n_actions = 0
    failures: list = []
    for action in enumerate_operations(X, Y, size_cap=size_cap):
        n_actions += 1
        for f in _product_action_checks(action):
            failures.append((X.flat, Y.flat, action.rho) + (f,))
    return n_actions, failures


def product_theorem_sweep(max_size: int = 4, workers: int = 1, **budget) -> SweepReport:
    """Every operation between every ordered pair of algebras up to the
    component size, with the full set of semidirect-product statements
    checked on each product."""
    algebras = _all_algebras(max_size, **budget)
    pairs = [(X, Y, max(max_size, 6)) for X in algebras for Y in algebras]
    outcomes = pmap(_pair_task, pairs, workers)
    per_size = {
        "algebras": len(algebras),
        "pairs": len(pairs),
        "actions": sum(n for n, _ in outcomes),
    }
    failures: list = []
    for _, fails in outcomes:
        failures.extend(fails)
    return SweepReport("product_theorems", per_size, tuple(failures))


# -- word engine suites -----------------------------------------------------


def word_engine_suite(
    triples: int = 10000,
    max_len: int = 4,
    budget: int = 12,
    seed: int = 0,
    corpus: list[AlgebraTable] | None = None,
) -> SweepReport:
    """Random-triple identity checks for the word engine on the corpus.

    Both defining identities are required to hold syntactically; budget
    overruns are counted per algebra and reported, not hidden.
    """
    corpus = catalog.corpus() if corpus is None else corpus
    rng = random.Random(seed)
    per: dict = {}
    failures: list = []
    for table in corpus:
        n = table.n
        blown = 0
        for _ in range(triples):
            a, b, c = (
                Word(table, tuple(rng.randrange(n) for _ in range(rng.randrange(max_len + 1))))
                for _ in range(3)
            )
            try:
                if word_dot(a.concat(b), c, budget).letters != word_dot(a, word_dot(b, c, budget), budget).letters:
                    failures.append(("left_split", table.flat, a.letters, b.letters, c.letters))
                lhs = word_dot(a, b.concat(c), budget)
                rhs = word_dot(word_dot(c, a, budget), b, budget).concat(word_dot(a, c, budget))
                if lhs.letters != rhs.letters:
                    failures.append(("right_split", table.flat, a.letters, b.letters, c.letters))
            except BudgetExceeded:
                blown += 1
        per[f"n{table.n}:{hash(table.flat) & 0xffff:04x}"] = {
            "triples": triples,
            "budget_exceeded": blown,
        }
    return SweepReport("word_identities", per, tuple(failures))


def word_action_suite(max_size: int = 3, max_len: int = 3, **budget) -> SweepReport:
    """Word-extended action compatibility over every action between
    algebras up to the size bound."""
    algebras = _all_algebras(max_size, **budget)
    per = {"actions": 0, "pairs_checked": 0, "budget_exceeded": 0}
    failures: list = []
    for X in algebras:
        for Y in algebras:
            for action in enumerate_operations(X, Y):
                rep = words.verify_word_action_compatibility(action, max_len=max_len)
                per["actions"] += 1
                per["pairs_checked"] += rep.pairs_checked
                per["budget_exceeded"] += rep.budget_exceeded
                for f in rep.failures:
                    failures.append((X.flat, Y.flat, action.rho, f))
    return SweepReport("word_actions", per, tuple(failures))


def closure_suite(depth: int = 2, max_len: int = 2) -> SweepReport:
    """The closure counterexample plus bounded product-word factorization
    checks on the catalog action and a trivial action."""
    failures: list = []
    rep = words.reproduce_sx_counterexample()
    if not rep.ok:
        failures.append(("counterexample_values", rep.lhs.letters, rep.rhs.letters))
    per: dict = {
        "counterexample": {"lhs": list(rep.lhs.letters), "rhs": list(rep.rhs.letters)},
    }
    actions = {
        "collapse_example": catalog.collapse_action_example(),
        "trivial_2x2": ActionMap.trivial(families.make_A(2), families.make_A(2)),
    }
    for name, action in actions.items():
        wrep = words.semidirect_word_product_check(action, max_len=max_len, depth=depth)
        per[name] = {
            "words_checked": wrep.words_checked,
            "budget_exceeded": wrep.budget_exceeded,
        }
        if not wrep.factorization_ok:
            failures.append((name, "factorization"))
        for d in wrep.distinguished:
            failures.append((name, "distinguished") + d)
    return SweepReport("closure_words", per, tuple(failures))


# -- consolidated runner ----------------------------------------------------


def verify_all(
    max_n_products: int = 3,
    max_n_lattices: int = 4,
    max_n_classification: int = 5,
    max_n_linear: int = 5,
    word_triples: int = 2000,
    workers: int = 1,
    seed: int = 0,
) -> dict:
    """Run every theorem suite at the configured sizes; the acceptance tests
    run the same suites at the sizes the criteria name."""
    reports = {
        "simple_linear": families.verify_simple_linear_classification(max_n_linear),
        "tail_plus": families.verify_tail_plus_theorem(max_n_classification),
        "conjecture": families.conjecture_search(max_n_classification),
        "hilbert": families.hilbert_structure_suite(min(max_n_classification, 5)),
        "ideal_lattices": ideal_lattice_sweep(max_n_lattices),
        "products": product_theorem_sweep(max_n_products, workers=workers),
        "words": word_engine_suite(triples=word_triples, seed=seed),
        "word_actions": word_action_suite(min(max_n_products, 3)),
        "closure": closure_suite(),
    }
    return {name: rep.to_json_dict() for name, rep in sorted(reports.items())}
