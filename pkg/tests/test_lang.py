import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cellguard.lang import (
    CellSyntaxError, build_cfg, parse_cell, parse_notebook_json,
    parse_notebook_text, pretty_print, qn, use_def,
)
from cellguard.lang import ast as A

from oracles import enumerate_paths, gen_loopfree_cell, seeded_names


def single(text):
    stmts = parse_cell(text)
    assert len(stmts) == 1
    return stmts[0]


class TestParser:
    def test_single_assignment(self):
        stmt = single("x = 1")
        assert isinstance(stmt, A.Assign)
        assert stmt.target == A.Name("x")
        assert stmt.value == A.Num(1)

    def test_empty_cell(self):
        assert parse_cell("") == []
        assert parse_cell("\n\n# comment only\n") == []

    def test_malformed_token_sequence_position(self):
        with pytest.raises(CellSyntaxError) as err:
            parse_cell("x = = 1")
        assert err.value.line == 1
        assert err.value.col == 5

    def test_tab_rejected(self):
        with pytest.raises(CellSyntaxError):
            parse_cell("if x:\n\ty = 1")

    def test_indent_must_be_multiple_of_four(self):
        with pytest.raises(CellSyntaxError):
            parse_cell("if x:\n   y = 1")

    def test_return_outside_function_rejected(self):
        with pytest.raises(CellSyntaxError):
            parse_cell("return 1")

    def test_builtin_names_cannot_be_bound(self):
        for text in ("print = 1", "def len(x):\n    return x", "for map in xs:\n    pass", "del range"):
            with pytest.raises(CellSyntaxError):
                parse_cell(text)

    def test_compound_structures(self):
        stmts = parse_cell(
            "if a > 1:\n    b = 2\nelif a > 0:\n    b = 3\nelse:\n    b = 4\n"
            "while b:\n    b -= 1\n"
            "for i in range(3):\n    print(i)\n"
            "def f(x, y):\n    return x + y\n"
        )
        kinds = [type(s).__name__ for s in stmts]
        assert kinds == ["If", "While", "For", "FuncDef"]
        if_stmt = stmts[0]
        assert len(if_stmt.arms) == 2 and if_stmt.orelse

    def test_dict_keys_are_strings(self):
        stmt = single('d = {"a": 1, "b": x}')
        assert stmt.value.keys == ("a", "b")
        with pytest.raises(CellSyntaxError):
            parse_cell("d = {1: 2}")

    def test_operators_and_literals(self):
        stmt = single('x = -2.5 + len("ab") * 3 // 2 % 2 and not y or z == [1, True, None]')
        assert isinstance(stmt, A.Assign)

    def test_statement_ids_are_preorder_and_cover_nesting(self):
        stmts = parse_cell("a = 1\nif a:\n    b = 2\n    c = 3\nelse:\n    d = 4\ne = 5\n")
        sids = []

        def collect(body):
            for s in body:
                sids.append(s.sid)
                if isinstance(s, A.If):
                    for _, arm in s.arms:
                        collect(arm)
                    collect(s.orelse)

        collect(stmts)
        assert sorted(sids) == list(range(len(sids)))


# expression strategies for the round-trip property
_names = st.sampled_from(["a", "b", "c", "xs", "d2"])


def _exprs(depth: int):
    leaf = st.one_of(
        _names.map(A.Name),
        st.integers(-50, 50).map(A.Num),
        st.floats(allow_nan=False, allow_infinity=False, width=16).map(lambda f: A.Num(float(f))),
        st.text(st.characters(codec="ascii", exclude_characters='\\"\n\t'), max_size=6).map(A.Str),
        st.booleans().map(A.Bool),
        st.just(A.NoneLit()),
    )
    if depth <= 0:
        return leaf
    sub = _exprs(depth - 1)
    return st.one_of(
        leaf,
        st.tuples(st.sampled_from(["+", "-", "*", "/", "and", "or"]), sub, sub).map(
            lambda t: A.Binary(t[0], t[1], t[2])
        ),
        st.tuples(st.sampled_from(["==", "<", ">="]), sub, sub).map(
            lambda t: A.Compare(t[0], t[1], t[2])
        ),
        st.tuples(sub, _names).map(lambda t: A.Attr(t[0], t[1])),
        st.tuples(sub, sub).map(lambda t: A.Sub(t[0], t[1])),
        st.lists(sub, max_size=3).map(lambda xs: A.ListLit(tuple(xs))),
        st.tuples(_names, sub).map(lambda t: A.Lambda((t[0],), t[1])),
        st.tuples(sub, st.lists(sub, max_size=2)).map(lambda t: A.Call(t[0], tuple(t[1]))),
        sub.map(lambda e: A.Unary("not", e)),
    )


def _stmts(depth: int):
    expr = _exprs(1)
    simple = st.one_of(
        st.tuples(_names, expr).map(lambda t: A.Assign(A.Name(t[0]), t[1])),
        st.tuples(_names, st.sampled_from(["+", "-", "*"]), expr).map(
            lambda t: A.AugAssign(A.Name(t[0]), t[1], t[2])
        ),
        expr.map(A.ExprStmt),
        _names.map(lambda n: A.Del(A.Name(n))),
        st.just(A.Pass()),
    )
    if depth <= 0:
        return simple
    body = st.lists(_stmts(depth - 1), min_size=1, max_size=2).map(tuple)
    return st.one_of(
        simple,
        st.tuples(expr, body, body).map(lambda t: A.If(((t[0], t[1]),), t[2])),
        st.tuples(expr, body).map(lambda t: A.While(t[0], t[1])),
        st.tuples(_names, expr, body).map(lambda t: A.For(t[0], t[1], t[2])),
        st.tuples(_names, body).map(
            lambda t: A.FuncDef(t[0], ("p",), t[1])
        ),
    )


class TestRoundTrip:
    @settings(max_examples=200, deadline=None)
    @given(st.lists(_stmts(2), max_size=4))
    def test_parse_pretty_print_round_trip(self, stmts):
        text = pretty_print(stmts)
        reparsed = parse_cell(text)
        assert list(stmts) == reparsed, f"source was:\n{text}"

    def test_round_trip_of_parsed_source(self):
        text = (
            'def agg(col):\n    return len(col) + 1\n'
            'd = {"k": [1, 2.5, "s"]}\n'
            "if d.k[0] > 1:\n    out = agg(d.k)\nelse:\n    out = 0\n"
        )
        stmts = parse_cell(text)
        assert parse_cell(pretty_print(stmts)) == stmts


class TestUseDef:
    def test_paper_map_lambda_example(self):
        stmt = single("gen = map(lambda x: f(x), foo + [bar])")
        use, defs = use_def(stmt)
        assert use == {qn("f"), qn("foo"), qn("bar")}
        assert defs == {qn("gen")}

    def test_aug_assign_reads_and_writes(self):
        use, defs = use_def(single("x += 1"))
        assert use == {qn("x")}
        assert defs == {qn("x")}

    def test_qualified_call_example(self):
        use, defs = use_def(single("df_agg_x = df_x.agg(agg_by_col)"))
        assert {qn("df_x"), qn("agg_by_col")} <= use
        assert defs == {qn("df_agg_x")}

    def test_subscript_read_includes_base_and_qualified(self):
        use, _ = use_def(single("y = a[0]"))
        assert use == {qn("a"), qn("a", 0)}

    def test_dynamic_subscript_degrades_to_base(self):
        use, _ = use_def(single("y = lst[i]"))
        assert use == {qn("lst"), qn("i")}

    def test_attr_write_reads_container_defines_member(self):
        use, defs = use_def(single("a.b = x"))
        assert use == {qn("a"), qn("x")}
        assert defs == {qn("a", "b")}

    def test_dynamic_target_defines_nothing(self):
        use, defs = use_def(single("a[i] = x"))
        assert use == {qn("a"), qn("i"), qn("x")}
        assert defs == set()

    def test_string_key_canonicalizes_to_attribute(self):
        use, _ = use_def(single('y = d["col"]'))
        assert qn("d", "col") in use
        assert qn("d", "col").text == "d.col"

    def test_funcdef_defines_name_only(self):
        stmts = parse_cell("def f(y):\n    return x + y")
        use, defs = use_def(stmts[0])
        assert use == set()
        assert defs == {qn("f")}

    def test_purity(self):
        stmt = single("z = a.b + c[1] + f(d)")
        assert use_def(stmt) == use_def(stmt)


class TestCfg:
    def test_straight_line_chain(self):
        cfg = build_cfg(parse_cell("x = 1\ny = x\n"))
        assert len(cfg.nodes) == 4  # entry, two statements, exit
        assert cfg.pred[cfg.entry] == []
        assert cfg.succ[cfg.exit] == []
        paths = enumerate_paths(cfg)
        assert len(paths) == 1 and len(paths[0]) == 4

    def test_if_else_diamond(self):
        cfg = build_cfg(parse_cell("if c:\n    x = 1\nelse:\n    x = 2\ny = x\n"))
        assert len(enumerate_paths(cfg)) == 2

    def test_while_has_back_edge_and_bypass(self):
        cfg = build_cfg(parse_cell("while c:\n    x = x + 1\n"))
        cond = next(n for n in cfg.nodes.values() if n.kind == "cond")
        succs = cfg.succ[cond.id]
        assert len(succs) == 2  # body and bypass
        body = next(n for n in succs if cfg.nodes[n].kind == "stmt")
        assert cond.id in cfg.succ[body]  # back edge

    def test_function_body_not_inlined(self):
        from cellguard.lang import function_cfg

        stmts = parse_cell("def f(x):\n    return x + g\ny = 1\n")
        cfg = build_cfg(stmts)
        labels = [n.label for n in cfg.nodes.values() if n.kind == "stmt"]
        assert "funcdef" in labels
        body = function_cfg(stmts[0])
        assert any(n.label == "return" for n in body.nodes.values())

    def test_unreachable_code_after_return_pruned(self):
        from cellguard.lang import function_cfg

        stmts = parse_cell("def f(x):\n    return x\n    y = 1\n")
        body = function_cfg(stmts[0])
        for nid in body.nodes:
            assert nid == body.entry or body.pred[nid] or nid == body.exit

    def test_path_count_equals_product_of_branch_arities(self):
        # with sequential (unnested) branches every path makes one selection
        # per branch node, so the counts multiply exactly
        rng = random.Random(11)
        names = seeded_names()
        for _ in range(60):
            cfg = build_cfg(parse_cell(gen_loopfree_cell(rng, names, max_depth=1)))
            product = 1
            for nid in cfg.branch_nodes():
                product *= len(cfg.succ[nid])
            assert len(enumerate_paths(cfg)) == product

    def test_nested_branches_bound_path_count(self):
        rng = random.Random(13)
        names = seeded_names()
        for _ in range(60):
            cfg = build_cfg(parse_cell(gen_loopfree_cell(rng, names)))
            product = 1
            for nid in cfg.branch_nodes():
                product *= len(cfg.succ[nid])
            assert 1 <= len(enumerate_paths(cfg)) <= product

    def test_every_node_reachable(self):
        rng = random.Random(12)
        names = seeded_names()
        for _ in range(40):
            cfg = build_cfg(parse_cell(gen_loopfree_cell(rng, names)))
            seen = set()
            stack = [cfg.entry]
            while stack:
                nid = stack.pop()
                if nid in seen:
                    continue
                seen.add(nid)
                stack.extend(cfg.succ[nid])
            assert seen == set(cfg.nodes)


class TestNotebookIO:
    def test_json_form(self):
        cells = parse_notebook_json('{"cells": [{"id": "c1", "source": "x = 1\\n"}, {"id": "c2", "source": "y = x\\n"}]}')
        assert [c.cell_id for c in cells] == ["c1", "c2"]
        assert cells[0].text == "x = 1\n"

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError):
            parse_notebook_json('{"cells": [{"id": "c1", "source": ""}, {"id": "c1", "source": ""}]}')

    def test_text_form_auto_ids(self):
        cells = parse_notebook_text("x = 1\n# %% next\ny = x\nprint(y)\n# %%\nz = y\n")
        assert [c.cell_id for c in cells] == ["c1", "c2", "c3"]
        assert cells[1].text == "y = x\nprint(y)\n"
