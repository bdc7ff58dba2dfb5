"""Grammar rules with functional right-hand sides.

A lambda rule rewrites one member of its input class through a term body
(field selections, record building); an analytic does the same through an
arbitrary host function.  Either way the result must be subsumed by the
declared output type, is coerced to it, and only then stored, so no rule
can corrupt a class collection.  Failures are reported per member and never
abort a run.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import EvalError, RuleFailure, StoreError, TermError
from .store import Store
from .taxonomy import Taxonomy
from .typecheck import (apply_coercion, infer_static_type, prove_subtype,
                        resolve_type)
from . import terms as T

Env = Callable[[str], Optional[T.Term]]


# ---------------------------------------------------------------------------
# term evaluation


def eval_term(t: T.Term, env: Env, tax: Taxonomy) -> T.Term:
    """Evaluate selections within a term.

    Aliases evaluate to themselves; they are dereferenced through `env`
    only when a selection needs to look inside one.
    """
    if isinstance(t, T.FieldSelection):
        base = _deref(eval_term(t.base, env, tax), env)
        if t.label.is_positional:
            inner = T.pred_app_parts(base)
            if inner is not None:
                head, args = inner
                if t.label.position >= len(args):
                    raise EvalError(
                        f"{head.name!r} has no argument {t.label.position}")
                return args[t.label.position]
        if not isinstance(base, T.Record):
            raise EvalError(f"selection from a non-record: {base!r}")
        for label, value in base.fields:
            if tax.label_match(label, t.label):
                return value
        raise EvalError(f"no field matching {t.label!r}")
    if isinstance(t, T.Record):
        return T.Record(tuple((l, eval_term(v, env, tax)) for l, v in t.fields))
    if isinstance(t, T.List):
        return T.List(tuple(eval_term(i, env, tax) for i in t.items))
    if isinstance(t, T.Var):
        raise EvalError(f"unbound variable {t.name!r}")
    return t


def _deref(t: T.Term, env: Env) -> T.Term:
    seen = set()
    while isinstance(t, T.TermAlias):
        if t.name in seen:
            raise EvalError(f"alias cycle at {t.name!r}")
        seen.add(t.name)
        target = env(t.name)
        if target is None:
            raise EvalError(f"unbound alias {t.name!r}")
        t = target
    return t


# ---------------------------------------------------------------------------
# lambda rules


@dataclass(frozen=True)
class LambdaRule:
    name: str
    param: str
    input_class: str
    body: T.Term
    output_type: T.Type


def lambda_rule(name: str, param: str, input_class: str, body: T.Term,
                output_type: T.Type) -> LambdaRule:
    extra = T.free_vars(body) - {param}
    if extra:
        raise TermError(f"rule {name!r} body has unbound variables {sorted(extra)}")
    return LambdaRule(name, param, input_class, body, output_type)


def apply_lambda(store: Store, rule: LambdaRule, member: T.Term) -> T.Term:
    """Rewrite one input-class member; RuleFailure when the rule does not
    apply or its result escapes the output type."""
    try:
        out_ty = resolve_type(rule.output_type, store._class_lookup)
    except Exception as exc:
        raise RuleFailure(f"rule {rule.name!r}: bad output type: {exc}") from exc
    try:
        result = eval_term(T.substitute({rule.param: member}, rule.body),
                           store.lookup, store.tax)
    except EvalError as exc:
        raise RuleFailure(f"rule {rule.name!r}: {exc}") from exc
    return check_and_coerce(store, result, out_ty, f"rule {rule.name!r}")


def check_and_coerce(store: Store, result: T.Term, out_ty: T.Type,
                     who: str) -> T.Term:
    if not isinstance(result, T.Term):
        raise RuleFailure(f"{who}: result is not a term: {result!r}")
    ty = infer_static_type(result, store.tax, store.type_of)
    if ty is None:
        raise RuleFailure(f"{who}: result has no static type")
    proof = prove_subtype(ty, out_ty, store.tax)
    if proof is None:
        raise RuleFailure(f"{who}: result type is not subsumed by the output type")
    return apply_coercion(proof, result)


def run_lambda(store: Store, rule: LambdaRule) -> "RuleReport":
    """Apply a rule to every member of its input class and collect the
    rewrites; storage of results is the analytics path's job."""
    report = RuleReport(rule.name)
    for mname, term in list(store.kb_class(rule.input_class).members):
        report.processed += 1
        try:
            report.results.append((mname, apply_lambda(store, rule, term)))
        except RuleFailure as exc:
            report.failures.append((mname, str(exc)))
    return report


# ---------------------------------------------------------------------------
# analytics


@dataclass(frozen=True)
class Analytic:
    name: str
    input_class: str
    output_class: str
    fn: Callable[[T.Term], T.Term]


def mk_analytic(store: Store, name: str, input_class: str, output_class: str,
                fn: Callable[[T.Term], T.Term],
                registry: dict[str, Analytic] | None = None) -> Analytic:
    if not name:
        raise StoreError("analytic name must be nonempty")
    store.kb_class(input_class)
    store.kb_class(output_class)
    analytic = Analytic(name, input_class, output_class, fn)
    if registry is not None:
        if name in registry:
            raise StoreError(f"analytic {name!r} already registered")
        registry[name] = analytic
    return analytic


@dataclass
class RuleReport:
    name: str
    processed: int = 0
    inserted: int = 0
    results: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [f"analytic\t{self.name}",
               f"processed\t{self.processed}",
               f"inserted\t{self.inserted}",
               f"failures\t{len(self.failures)}"]
        for mname, msg in self.failures:
            out.append(f"failure.{mname}\t{msg}")
        return out


def member_name(class_name: str, t: T.Term) -> str:
    from .sexp import render_sexp
    digest = hashlib.sha1(render_sexp(t).encode("utf-8")).hexdigest()[:12]
    return f"{class_name}#{digest}"


def run_analytic(store: Store, analytic: Analytic) -> RuleReport:
    """Apply the analytic to every input member; results that type-check
    against the output class are coerced and stored, everything else is a
    reported per-member failure."""
    out_ty = store.resolve_class_type(analytic.output_class)
    report = RuleReport(analytic.name)
    for mname, term in list(store.kb_class(analytic.input_class).members):
        report.processed += 1
        try:
            try:
                result = analytic.fn(term)
            except Exception as exc:
                raise RuleFailure(
                    f"analytic {analytic.name!r} raised: {exc}") from exc
            coerced = check_and_coerce(store, result, out_ty,
                                       f"analytic {analytic.name!r}")
        except RuleFailure as exc:
            report.failures.append((mname, str(exc)))
            continue
        if store.add_member(analytic.output_class,
                            member_name(analytic.output_class, coerced),
                            coerced):
            report.inserted += 1
    store.commit()
    return report
