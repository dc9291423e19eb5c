import itertools
import json
import random

import pytest

from verifact.models import (
    Citation,
    ExecStatus,
    ExecutionMatrix,
    ExecutionOutput,
    KbFact,
    MathCalc,
    ScholarRecord,
    SearchSnippet,
    SnippetSource,
    Task,
)
from verifact.arithmetic import eval_arithmetic
from verifact.verification import (
    TAG_WRONG_AUTHORS,
    TAG_WRONG_TITLE,
    TAG_WRONG_YEAR,
    citation_not_found_verdict,
    claimed_last_names,
    match_authors_llm,
    match_authors_subset,
    self_check,
    verify_citation_claim,
    verify_code_claim,
    verify_kb_claim,
    verify_math_claims,
)


def matrix_from_grid(grid, statuses=None):
    """Rows of raw values; last column is the solution under test."""
    rows = []
    for i, row in enumerate(grid):
        cells = []
        for j, value in enumerate(row):
            status = ExecStatus.OK
            if statuses and statuses[i][j] is not None:
                status = statuses[i][j]
            cells.append(ExecutionOutput(value=str(value), status=status, claim_id="c"))
        rows.append(tuple(cells))
    inputs = tuple(f"call_{i}" for i in range(len(grid)))
    return ExecutionMatrix(inputs=inputs, outputs=tuple(rows))


# --- majority vote on the printed matrices -------------------------------------

def test_vote_accepts_matching_solution():
    # generated outputs [0,0,0], [2,2,3], [5,5,6]; under test [0,2,5]
    matrix = matrix_from_grid([[0, 0, 0, 0], [2, 2, 3, 2], [5, 5, 6, 5]])
    verdict = verify_code_claim(matrix)
    assert verdict.factuality is True
    assert verdict.flags == ()


def test_vote_rejects_differing_solution():
    # generated outputs [0,0,0], [3,3,3], [4,4,4]; under test [0,2,3]
    matrix = matrix_from_grid([[0, 0, 0, 0], [3, 3, 3, 2], [4, 4, 4, 3]])
    verdict = verify_code_claim(matrix)
    assert verdict.factuality is False


def test_vote_identical_columns_for_identical_solutions():
    matrix = matrix_from_grid([[0.56, 0.56, 0.56, 0.56], [0.123, 0.123, 0.123, 0.123]])
    assert verify_code_claim(matrix).factuality is True


def test_vote_all_ties_is_undetermined_true():
    matrix = matrix_from_grid([[1, 2, 1], [3, 4, 3]])  # k=2, no plurality anywhere
    verdict = verify_code_claim(matrix)
    assert verdict.factuality is True
    assert "undetermined" in verdict.flags


def test_vote_k1_degenerates_to_equality():
    assert verify_code_claim(matrix_from_grid([[7, 7]])).factuality is True
    assert verify_code_claim(matrix_from_grid([[7, 8]])).factuality is False


def test_vote_invariant_to_generated_column_permutation():
    grid = [[0, 1, 0, 0], [2, 2, 3, 2], [5, 6, 5, 5]]
    base = verify_code_claim(matrix_from_grid(grid)).factuality
    for perm in itertools.permutations(range(3)):
        permuted = [[row[j] for j in perm] + [row[3]] for row in grid]
        assert verify_code_claim(matrix_from_grid(permuted)).factuality == base


def test_vote_invariant_to_row_permutation():
    grid = [[0, 0, 1, 0], [2, 2, 2, 3], [5, 5, 5, 5]]
    base = verify_code_claim(matrix_from_grid(grid)).factuality
    for perm in itertools.permutations(range(3)):
        permuted = [grid[i] for i in perm]
        assert verify_code_claim(matrix_from_grid(permuted)).factuality == base


def test_vote_under_test_excluded_from_vote():
    # two generated disagree; under test agrees with one of them: tie stays a tie
    matrix = matrix_from_grid([[1, 2, 2]])
    verdict = verify_code_claim(matrix)
    assert "undetermined" in verdict.flags


def test_vote_crashing_under_test_never_matches():
    statuses = [[None, None, None, ExecStatus.EXCEPTION]]
    matrix = matrix_from_grid([[1, 1, 1, 1]], statuses)
    assert verify_code_claim(matrix).factuality is False


def test_vote_crashing_candidates_do_not_form_plurality():
    statuses = [[ExecStatus.EXCEPTION, ExecStatus.EXCEPTION, None, None]]
    # two crashes count as distinct sentinel values, so the row is a 3-way tie:
    # skipped rather than letting crashes vote together
    matrix = matrix_from_grid([[9, 9, 4, 4]], statuses)
    verdict = verify_code_claim(matrix)
    assert verdict.factuality is True
    assert "undetermined" in verdict.flags


def test_vote_timeout_row_skipped_when_tied():
    statuses = [
        [ExecStatus.TIMEOUT, ExecStatus.TIMEOUT, None],
        [None, None, None],
    ]
    matrix = matrix_from_grid([[0, 0, 0], [4, 4, 4]], statuses)
    verdict = verify_code_claim(matrix)
    assert verdict.factuality is True


# --- math ---------------------------------------------------------------------

def test_verify_math_claims_all_matched():
    claims = [
        MathCalc(calculation="30 / 3", calculated_answer="10"),
        MathCalc(calculation="0.20 * 45", calculated_answer="9"),
    ]
    pairs = [(c, eval_arithmetic(c)) for c in claims]
    verdicts, response = verify_math_claims(pairs)
    assert all(v.factuality for v in verdicts)
    assert response is True


def test_verify_math_claims_one_false():
    claims = [
        MathCalc(calculation="30 / 3", calculated_answer="10"),
        MathCalc(calculation="23 * 4319216", calculated_answer="99305768"),
    ]
    pairs = [(c, eval_arithmetic(c)) for c in claims]
    verdicts, response = verify_math_claims(pairs)
    assert [v.factuality for v in verdicts] == [True, False]
    assert response is False
    assert verdicts[1].error is not None


def test_verify_math_claims_empty():
    verdicts, response = verify_math_claims([])
    assert verdicts == []
    assert response is True


# --- citations -------------------------------------------------------------------

BERT_TITLE = "BERT: Pre-training of Deep Bidirectional Transformers for Language Understanding"


def test_citation_bert_matches():
    claim = Citation(
        title=BERT_TITLE,
        year=2018,
        authors="Jacob Devlin, Ming-Wei Chang, Kenton Lee, Kristina Toutanova",
    )
    record = ScholarRecord(
        claim_id=claim.id,
        title=BERT_TITLE,
        authors=("Jacob Devlin", "Ming-Wei Chang", "Kenton Lee", "Kristina Toutanova"),
        year=2018,
    )
    verdict = verify_citation_claim(claim, record)
    assert verdict.factuality is True
    assert verdict.error_tags == ()


def test_citation_wrong_author_and_year():
    claim = Citation(
        title="The Impact of Artificial Intelligence on Employment",
        year=2019,
        authors="Acemoglu and Restrepo",
    )
    record = ScholarRecord(
        claim_id=claim.id,
        title="The impact of artificial intelligence on employment",
        authors=("Erik Brynjolfsson", "Tom Mitchell"),
        year=2017,
    )
    verdict = verify_citation_claim(claim, record)
    assert verdict.factuality is False
    assert set(verdict.error_tags) == {TAG_WRONG_AUTHORS, TAG_WRONG_YEAR}


def test_citation_title_match_is_case_insensitive():
    claim = Citation(title="A Title.", year=2020, authors="Smith")
    record = ScholarRecord(claim_id=claim.id, title="a title", authors=("Jo Smith",), year=2020)
    assert verify_citation_claim(claim, record).factuality is True


def test_citation_error_tags_are_exactly_failed_conjuncts():
    record = ScholarRecord(claim_id="x", title="Right Title", authors=("Ann Right",), year=2000)
    cases = [
        ("Right Title", 2000, "Right", set()),
        ("Wrong Title", 2000, "Right", {TAG_WRONG_TITLE}),
        ("Right Title", 2001, "Right", {TAG_WRONG_YEAR}),
        ("Right Title", 2000, "Wrong", {TAG_WRONG_AUTHORS}),
        ("Wrong Title", 2001, "Wrong", {TAG_WRONG_TITLE, TAG_WRONG_YEAR, TAG_WRONG_AUTHORS}),
    ]
    for title, year, authors, expected in cases:
        claim = Citation(title=title, year=year, authors=authors)
        verdict = verify_citation_claim(claim, record)
        assert set(verdict.error_tags) == expected
        assert verdict.factuality == (not expected)


def test_citation_not_found_maps_to_wrong_title():
    claim = Citation(title="Nonexistent Paper", year=2020, authors="Nobody")
    verdict = citation_not_found_verdict(claim)
    assert verdict.factuality is False
    assert verdict.error_tags == (TAG_WRONG_TITLE,)


# --- author matching ----------------------------------------------------------------

def test_authors_worked_example_positive():
    assert match_authors_subset(
        "J. Devlin and M. Chang", ["Devlin", "M Chang", "Kristina Toutanova"]
    ) is True


def test_authors_worked_example_negative():
    assert match_authors_subset("Tom Brown et. al", ["Y. Lecun", "G. Hinton"]) is False


def test_authors_trivial_identity():
    assert match_authors_subset("X", ["X"]) is True


def test_authors_empty_claim_is_false():
    assert match_authors_subset("", ["Someone"]) is False
    assert match_authors_subset("et al.", ["Someone"]) is False


def test_authors_last_name_extraction():
    assert claimed_last_names("J. Devlin and M. Chang") == ["devlin", "chang"]
    assert claimed_last_names("Acemoglu and Restrepo") == ["acemoglu", "restrepo"]
    assert claimed_last_names("Tom Brown et. al") == ["brown"]
    assert claimed_last_names("Ming-Wei Chang, Kenton Lee & Kristina Toutanova") == [
        "chang",
        "lee",
        "toutanova",
    ]


def test_authors_monotone_in_retrieved():
    rng = random.Random(99)
    pool = ["Ada Lovelace", "Alan Turing", "Grace Hopper", "Kurt Godel", "Emmy Noether"]
    claims = ["Lovelace and Turing", "Hopper", "Noether, Godel", "Someone Else"]
    for claimed in claims:
        for size in range(len(pool)):
            subset = rng.sample(pool, size)
            before = match_authors_subset(claimed, subset)
            extended = subset + [rng.choice(pool)]
            after = match_authors_subset(claimed, extended)
            assert not (before is True and after is False)


def test_authors_llm_backend(scripted_gateway):
    sg = scripted_gateway(
        [("[string1]: \"J. Devlin and M. Chang\"", '{"reasoning": "both present", "factuality": True}')]
    )
    assert match_authors_llm(sg.gateway, "J. Devlin and M. Chang", ["Devlin", "M Chang"]) is True


# --- KB claim verification ------------------------------------------------------------

def _snippets(texts):
    return [
        SearchSnippet(claim_id="c", text=t, source=SnippetSource.ORGANIC) for t in texts
    ]


def test_verify_kb_claim_false_from_evidence(scripted_gateway):
    claim = KbFact(statement="Argentina has not won the World Cup since 1986")
    reply = json.dumps(
        {
            "reasoning": "Multiple pieces of evidence state a 2022 title.",
            "error": "The claim contradicts the 2022 result.",
            "correction": "Argentina won the World Cup in 2022.",
            "factuality": False,
        }
    )
    sg = scripted_gateway([(claim.statement, reply)])
    verdict = verify_kb_claim(
        sg.gateway, claim, _snippets(["Argentina won the World Cup in 2022."])
    )
    assert verdict.factuality is False
    assert verdict.error is not None
    assert verdict.correction == "Argentina won the World Cup in 2022."


def test_verify_kb_claim_true_keeps_error_null(scripted_gateway):
    claim = KbFact(statement="Ireland has an obesity rate of 18%")
    reply = '{"reasoning": "evidence agrees", "error": "None", "correction": "None", "factuality": True}'
    sg = scripted_gateway([(claim.statement, reply)])
    verdict = verify_kb_claim(sg.gateway, claim, _snippets(["18% obesity in Irish adults"]))
    assert verdict.factuality is True
    assert verdict.error is None


def test_verify_kb_claim_no_evidence_flag(scripted_gateway):
    claim = KbFact(statement="Something broadly known")
    reply = '{"reasoning": "prior knowledge", "factuality": True}'
    sg = scripted_gateway([(claim.statement, reply)])
    verdict = verify_kb_claim(sg.gateway, claim, [])
    assert verdict.factuality is True
    assert "no_evidence" in verdict.flags


def test_verify_kb_claim_malformed_fails_closed(scripted_gateway):
    claim = KbFact(statement="Anything")
    sg = scripted_gateway([(claim.statement, "not json")])
    verdict = verify_kb_claim(sg.gateway, claim, [])
    assert verdict.factuality is False
    assert verdict.reasoning == "verification-failed"


def test_verify_kb_evidence_passed_in_collection_order(scripted_gateway):
    claim = KbFact(statement="ordering probe")
    sg = scripted_gateway([(claim.statement, '{"reasoning": "ok", "factuality": true}')])
    verify_kb_claim(sg.gateway, claim, _snippets(["first", "second", "third"]))
    prompt = sg.calls[0]
    assert prompt.index("first") < prompt.index("second") < prompt.index("third")


# --- self-check -------------------------------------------------------------------------

def test_self_check_zero_shot(scripted_gateway):
    sg = scripted_gateway(
        [("Now complete the following", '{"reasoning": "looks right", "factuality": True}')]
    )
    verdict = self_check(sg.gateway, Task.KBQA, "Paris is the capital of France", shots=0)
    assert verdict.factuality is True
    assert "Here are three examples" not in sg.calls[0]


def test_self_check_three_shot_has_three_demo_blocks(scripted_gateway):
    sg = scripted_gateway(
        [("Now complete the following", '{"reasoning": "hm", "factuality": False}')]
    )
    self_check(sg.gateway, Task.MATH, "17 + 26 = 44", shots=3)
    prompt = sg.calls[0]
    assert "Here are three examples" in prompt
    # three demonstration responses plus the final open slot
    assert prompt.count("[response]:") == 4
    assert prompt.count("[content]:") == 4


def test_self_check_rejects_other_shots(scripted_gateway):
    sg = scripted_gateway([])
    with pytest.raises(ValueError):
        self_check(sg.gateway, Task.KBQA, "x", shots=1)


def test_verify_kb_claim_false_without_error_gets_one(scripted_gateway):
    claim = KbFact(statement="A dubious statement")
    reply = '{"reasoning": "contradicted by snippets", "factuality": false}'
    sg = scripted_gateway([(claim.statement, reply)])
    verdict = verify_kb_claim(sg.gateway, claim, _snippets(["counterevidence"]))
    assert verdict.factuality is False
    assert verdict.error == "contradicted by snippets"
