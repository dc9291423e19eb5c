#!/usr/bin/env python3
"""Build the shipped offline bundle: datasets under data/ and recorded
fixtures under fixtures/.

Runs the real pipeline in record mode against scripted transports whose
answers are pinned below, so a rebuild is fully deterministic. Run from
the repository root:

    python3 scripts/build_fixtures.py
"""

from __future__ import annotations

import json
import shutil
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from verifact.config import PipelineConfig  # noqa: E402
from verifact.datasets import load_dataset  # noqa: E402
from verifact.fixtures import Mode  # noqa: E402
from verifact.models import Task  # noqa: E402
from verifact.pipeline import PipelineContext, run_check_pipeline, run_self_check  # noqa: E402
from verifact.sandbox import SandboxClient  # noqa: E402

FIXTURE_DIR = REPO / "fixtures"
DATA_DIR = REPO / "data"


# --------------------------------------------------------------------------
# pinned content
# --------------------------------------------------------------------------

BERDYCH_TEXT = (
    "Tomas Berdych defeated Gael Monfis 6-1, 6-4 on Saturday. The sixth-seed reaches "
    "Monte Carlo Masters final for the first time . Berdych will face either Rafael "
    "Nadal or Novak Djokovic in the final."
)
BERDYCH_CLAIMS = [
    "Tomas Berdych defeated Gael Monfis 6-1, 6-4",
    "Tomas Berdych defeated Gael Monfis 6-1, 6-4 on Saturday",
    "Tomas Berdych reaches Monte Carlo Masters final",
    "Tomas Berdych is the sixth-seed",
    "Tomas Berdych reaches Monte Carlo Masters final for the first time",
    "Berdych will face either Rafael Nadal or Novak Djokovic",
    "Berdych will face either Rafael Nadal or Novak Djokovic in the final",
]

TINDER_TEXT = (
    "Tinder only displays the last 34 photos - but users can easily see more. "
    "Firm also said it had improved its mutual friends feature."
)
TINDER_CLAIMS = [
    "Tinder only displays the last photos",
    "Tinder only displays the last 34 photos",
    "Tinder users can easily see more photos",
    "Tinder said it had improved its feature",
    "Tinder said it had improved its mutual friends feature",
]

FALSE_PAIR_TEXT = (
    "Argentina has not won the World Cup since 1986. "
    "Ireland has an obesity rate of 26.9%."
)
ARGENTINA_CLAIM = "Argentina has not won the World Cup since 1986"
IRELAND_CLAIM = "Ireland has an obesity rate of 26.9%"

ARGENTINA_QUERIES = ["Argentina World Cup wins since 1986", "Last time Argentina won World Cup"]
IRELAND_QUERIES = ["Ireland obesity rate statistics", "Current obesity rate in Ireland"]

ARGENTINA_EVIDENCE = [
    "Argentina is one of the most successful teams in the tournament's history, having "
    "won three World Cups: in 1978, 1986, 2022. Argentina has also been runner up "
    "three times: in 1930, 1990 and 2014.",
    "Previously, the last time Argentina won the World Cup was 1986, when it defeated "
    "Germany to win its second title in three tournaments.",
]
IRELAND_EVIDENCE = [
    "Just under four in ten (37%) of people have a normal weight, six out of ten "
    "(37% overweight and a further 23% obese) overweight or obese.",
    "The prevalence of obesity in Irish adults is currently 18%, with men at 20% and "
    "women at 16%. Since 1990, obesity has more than doubled in men from 8% to 20%.",
]

ARGENTINA_VERDICT = {
    "reasoning": (
        "The given text states that Argentina has not won the World Cup since 1986. "
        "However, multiple pieces of evidence suggest that Argentina won the World Cup "
        "in 2022."
    ),
    "error": "Argentina won the World Cup in 2022, so the claim is outdated.",
    "correction": "Argentina last won the World Cup in 2022.",
    "factuality": False,
}
IRELAND_VERDICT = {
    "reasoning": (
        "The given text states that Ireland has an obesity rate of 26.9%, but the "
        "provided evidences show different numbers. The second evidence states that "
        "the prevalence of obesity in Irish adults is currently 18%, with men at 20% "
        "and women at 16%. This contradicts the given text."
    ),
    "error": "The stated obesity rate of 26.9% does not match the reported 18%.",
    "correction": "Ireland has an obesity rate of 18%.",
    "factuality": False,
}

HUMANEVAL_2_PROMPT = (
    "def truncate_number(number: float) -> float:\n"
    '    """ Given a positive floating point number, it can be decomposed into\n'
    "    and integer part (largest integer smaller than given number) and decimals\n"
    "    (leftover part always smaller than 1).\n\n"
    '    Return the decimal part of the number.\n    """'
)
TRUNCATE_UNDER_TEST = (
    "def truncate_number(number: float) -> float:\n"
    "    integer_part = number // 1\n"
    "    decimal_part = number - integer_part\n"
    "    return decimal_part"
)
TRUNCATE_SOLUTION = "def truncate_number(number: float) -> float:\n    return number - int(number)"
TRUNCATE_CALLS = ["truncate_number(4.56)", "truncate_number(0.123)", "truncate_number(19.999)"]
TRUNCATE_VALUES = ["0.5599999999999996", "0.123", "0.9989999999999988"]

HUMANEVAL_36_PROMPT = (
    "def fizz_buzz(n: int):\n"
    '    """Return the number of times the digit 7 appears in integers less than n '
    'which are divisible by 11 or 13."""'
)
FIZZ_UNDER_TEST = (
    "def fizz_buzz(n: int):\n"
    "    count = 0\n"
    "    for i in range(n):\n"
    "        if i % 11 == 0 or i % 13 == 0:\n"
    "            if str(i).count('7') > 0:\n"
    "                count += 1\n"
    "    return count"
)
FIZZ_SOLUTION_IN = (
    "def fizz_buzz(n: int):\n"
    "    count = 0\n"
    "    for i in range(n):\n"
    "        if i % 11 == 0 or i % 13 == 0:\n"
    "            if '7' in str(i):\n"
    "                count += 1\n"
    "    return count"
)
FIZZ_SOLUTION_COUNT = (
    "def fizz_buzz(n: int):\n"
    "    count = 0\n"
    "    for i in range(n):\n"
    "        if i % 11 == 0 or i % 13 == 0:\n"
    "            count += str(i).count('7')\n"
    "    return count"
)
FIZZ_SOLUTION_FROM1 = (
    "def fizz_buzz(n: int):\n"
    "    count = 0\n"
    "    for i in range(1, n):\n"
    "        if i % 11 == 0 or i % 13 == 0:\n"
    "            count += str(i).count('7')\n"
    "    return count"
)
FIZZ_CALLS_A = ["fizz_buzz(50)", "fizz_buzz(100)", "fizz_buzz(200)"]
FIZZ_CALLS_B = ["fizz_buzz(50)", "fizz_buzz(100)", "fizz_buzz(150)"]

# execution outputs pinned from the worked examples
SANDBOX_OUTPUTS = {}
for solution in (TRUNCATE_SOLUTION, TRUNCATE_UNDER_TEST):
    for call, value in zip(TRUNCATE_CALLS, TRUNCATE_VALUES):
        SANDBOX_OUTPUTS[(solution, call)] = value
for call, value in zip(FIZZ_CALLS_A, ["0", "2", "5"]):
    SANDBOX_OUTPUTS[(FIZZ_SOLUTION_IN, call)] = value
for call, value in zip(FIZZ_CALLS_A, ["0", "3", "6"]):
    SANDBOX_OUTPUTS[(FIZZ_SOLUTION_COUNT, call)] = value
for call, value in zip(FIZZ_CALLS_A, ["0", "2", "5"]):
    SANDBOX_OUTPUTS[(FIZZ_UNDER_TEST, call)] = value
for call, value in zip(FIZZ_CALLS_B, ["0", "3", "4"]):
    SANDBOX_OUTPUTS[(FIZZ_SOLUTION_FROM1, call)] = value
for call, value in zip(FIZZ_CALLS_B, ["0", "2", "3"]):
    SANDBOX_OUTPUTS[(FIZZ_UNDER_TEST, call)] = value

CIRCLE_PROMPT = "What is the area of a circle with a diameter of 10 inches?"
CIRCLE_SOLUTION = (
    "To find the area, we first calculate the radius as the diameter divided by 2, so "
    "the radius is 10/2 = 5 inches. Then, we use the formula for the area of a circle, "
    "which is πr^2. Plugging in the radius we get, Area = π5^2 = 78.54 square inches."
)
CIRCLE_CLAIMS = [("10 / 2", "5"), ("π * 5^2", "78.54")]

DISCOUNT_PROMPT = (
    "A store originally sold a shirt for $45. They are offering a 20% discount on the "
    "shirt. How much will the shirt cost now?"
)
DISCOUNT_SOLUTION = (
    "The discount on the shirt is calculated as 20% of $45, which is 0.20 * 45 = $9. "
    "The new price of the shirt after the discount is $45 - $9 = $36."
)
DISCOUNT_CLAIMS = [("0.20 * 45", "9"), ("45 - 9", "36")]

BIGNUM_PROMPT = (
    "A factory packs 4319216 bolts into each of 23 crates, and a warehouse splits "
    "60444034 screws evenly across 12 bins. How many bolts are packed in total, and "
    "how many screws go into each bin?"
)
BIGNUM_SOLUTION = (
    "The factory packs 23 * 4319216 = 99305768 bolts in total. The warehouse puts "
    "60444034 / 12 = 5037002.83 screws into each bin."
)
BIGNUM_CLAIMS = [("23 * 4319216", "99305768"), ("60444034 / 12", "5037002.83")]
BIGNUM_CLAIM_LABELS = [False, True]

BERT_TITLE = "BERT: Pre-training of Deep Bidirectional Transformers for Language Understanding"
BERT_AUTHORS = "Jacob Devlin, Ming-Wei Chang, Kenton Lee, Kristina Toutanova"
GPT2_TITLE = "Language Models are Unsupervised Multitask Learners"
GPT2_AUTHORS = "Alec Radford, Jeffrey Wu, Rewon Child, David Luan, Dario Amodei, Ilya Sutskever"
AI_EMPLOYMENT_TITLE = "The Impact of Artificial Intelligence on Employment"
ATTENTION_TITLE = "Attention Is All You Need"

REVIEW_1 = (
    "Pretrained language models reshaped natural language processing. The paper "
    f'"{BERT_TITLE}" by {BERT_AUTHORS} (2018) introduced masked-language-model '
    f'pretraining, while "{GPT2_TITLE}" by {GPT2_AUTHORS} (2019) showed strong '
    "zero-shot behaviour from scaling."
)
REVIEW_1_CITATIONS = [
    {"paper_title": BERT_TITLE, "paper_author(s)": BERT_AUTHORS, "paper_pub_year": "2018"},
    {"paper_title": GPT2_TITLE, "paper_author(s)": GPT2_AUTHORS, "paper_pub_year": "2019"},
]

REVIEW_2 = (
    "Economists have debated how automation shifts labour demand. The study "
    f'"{AI_EMPLOYMENT_TITLE}" by Acemoglu and Restrepo (2019) is often cited in this '
    f'debate, alongside the architecture paper "{ATTENTION_TITLE}" by Ashish Vaswani, '
    "Noam Shazeer, Niki Parmar, Jakob Uszkoreit, Llion Jones, Aidan N. Gomez, Lukasz "
    "Kaiser, Illia Polosukhin (2017)."
)
REVIEW_2_CITATIONS = [
    {
        "paper_title": AI_EMPLOYMENT_TITLE,
        "paper_author(s)": "Acemoglu and Restrepo",
        "paper_pub_year": "2019",
    },
    {
        "paper_title": ATTENTION_TITLE,
        "paper_author(s)": (
            "Ashish Vaswani, Noam Shazeer, Niki Parmar, Jakob Uszkoreit, Llion Jones, "
            "Aidan N. Gomez, Lukasz Kaiser, Illia Polosukhin"
        ),
        "paper_pub_year": "2017",
    },
]

SCHOLAR_RECORDS = {
    BERT_TITLE: {
        "title": BERT_TITLE,
        "year": 2018,
        "authors": [
            {"name": "Jacob Devlin"},
            {"name": "Ming-Wei Chang"},
            {"name": "Kenton Lee"},
            {"name": "Kristina Toutanova"},
        ],
    },
    GPT2_TITLE: {
        "title": GPT2_TITLE,
        "year": 2019,
        "authors": [
            {"name": "Alec Radford"},
            {"name": "Jeffrey Wu"},
            {"name": "Rewon Child"},
            {"name": "David Luan"},
            {"name": "Dario Amodei"},
            {"name": "Ilya Sutskever"},
        ],
    },
    AI_EMPLOYMENT_TITLE: {
        "title": "The impact of artificial intelligence on employment",
        "year": 2017,
        "authors": [{"name": "Erik Brynjolfsson"}, {"name": "Tom Mitchell"}],
    },
    ATTENTION_TITLE: {
        "title": "Attention Is All You Need",
        "year": 2017,
        "authors": [
            {"name": "Ashish Vaswani"},
            {"name": "Noam Shazeer"},
            {"name": "Niki Parmar"},
            {"name": "Jakob Uszkoreit"},
            {"name": "Llion Jones"},
            {"name": "Aidan N. Gomez"},
            {"name": "Lukasz Kaiser"},
            {"name": "Illia Polosukhin"},
        ],
    },
}

# self-check (no tools) verdicts for the math claims; the model trusts its own
# big-number arithmetic and doubts the long division, unlike the pipeline
SELF_CHECK_MATH = {
    "10 / 2 = 5": True,
    "π * 5^2 = 78.54": True,
    "0.20 * 45 = 9": True,
    "45 - 9 = 36": True,
    "23 * 4319216 = 99305768": True,
    "60444034 / 12 = 5037002.83": False,
}


# --------------------------------------------------------------------------
# scripted transports
# --------------------------------------------------------------------------

def _claims_json(statements):
    return json.dumps([{"claim": s} for s in statements])


def _kb_verify_json(verdict):
    return json.dumps(verdict)


def _confirming_page(snippets):
    return {"organic": [{"title": "source", "snippet": s, "link": "https://example.org"} for s in snippets]}


class LlmScript:
    """Ordered (matchers, responses) table; all matchers must be substrings.

    A matcher row holds a list of responses consumed in order for repeated
    hits (sticky on the last one).
    """

    def __init__(self):
        self.rows = []

    def add(self, matchers, *responses):
        if isinstance(matchers, str):
            matchers = (matchers,)
        self.rows.append({"matchers": tuple(matchers), "responses": list(responses), "used": 0})

    def __call__(self, url, headers, body, timeout):
        user = body["messages"][1]["content"]
        for row in self.rows:
            if all(m in user for m in row["matchers"]):
                index = min(row["used"], len(row["responses"]) - 1)
                row["used"] += 1
                return {
                    "choices": [{"message": {"content": row["responses"][index]}}],
                    "usage": {"prompt_tokens": 0, "completion_tokens": 0},
                }
        raise AssertionError(f"no scripted LLM response for prompt: {user[:200]!r}")


def build_llm_script() -> LlmScript:
    script = LlmScript()

    # claim extraction
    script.add(f"Now complete the following:\n\n[text]:\n{BERDYCH_TEXT}", _claims_json(BERDYCH_CLAIMS))
    script.add(f"Now complete the following:\n\n[text]:\n{TINDER_TEXT}", _claims_json(TINDER_CLAIMS))
    script.add(
        f"Now complete the following:\n\n[text]:\n{FALSE_PAIR_TEXT}",
        _claims_json([ARGENTINA_CLAIM, IRELAND_CLAIM]),
    )
    script.add(
        f"Now complete the following:\n\n[math problem]:\n{CIRCLE_PROMPT}",
        json.dumps(
            [{"math_calculation": c, "calculated_answer": a} for c, a in CIRCLE_CLAIMS]
        ),
    )
    script.add(
        f"Now complete the following:\n\n[math problem]:\n{DISCOUNT_PROMPT}",
        json.dumps(
            [{"math_calculation": c, "calculated_answer": a} for c, a in DISCOUNT_CLAIMS]
        ),
    )
    script.add(
        f"Now complete the following:\n\n[math problem]:\n{BIGNUM_PROMPT}",
        json.dumps(
            [{"math_calculation": c, "calculated_answer": a} for c, a in BIGNUM_CLAIMS]
        ),
    )
    script.add(f"[text]:\n{REVIEW_1}", json.dumps(REVIEW_1_CITATIONS))
    script.add(f"[text]:\n{REVIEW_2}", json.dumps(REVIEW_2_CITATIONS))

    # search query generation: two queries per kb claim
    for statement in BERDYCH_CLAIMS + TINDER_CLAIMS:
        script.add(
            f"Now complete the following:\n[claim]: {statement}",
            json.dumps([f"Is it true that {statement}?", statement]),
        )
    script.add(
        f"Now complete the following:\n[claim]: {ARGENTINA_CLAIM}",
        json.dumps(ARGENTINA_QUERIES),
    )
    script.add(
        f"Now complete the following:\n[claim]: {IRELAND_CLAIM}",
        json.dumps(IRELAND_QUERIES),
    )

    # kb verification
    for statement in BERDYCH_CLAIMS + TINDER_CLAIMS:
        script.add(
            ("The following is the given text", f"[text]: {statement}"),
            _kb_verify_json(
                {
                    "reasoning": f"The retrieved snippets report the same fact: {statement}.",
                    "error": "None",
                    "correction": "None",
                    "factuality": True,
                }
            ),
        )
    script.add(
        ("The following is the given text", f"[text]: {ARGENTINA_CLAIM}"),
        _kb_verify_json(ARGENTINA_VERDICT),
    )
    script.add(
        ("The following is the given text", f"[text]: {IRELAND_CLAIM}"),
        _kb_verify_json(IRELAND_VERDICT),
    )

    # code test inputs and candidate solutions
    def calls_json(calls):
        return json.dumps({f"function_call_{i + 1}": c for i, c in enumerate(calls)})

    def solution_json(code):
        return json.dumps({"reasoning": "Direct implementation.", "python_solution": code})

    script.add(
        ("generate 3 distinct function calls", "truncate_number"),
        calls_json(TRUNCATE_CALLS),
    )
    script.add(
        ("generate 3 distinct function calls", "fizz_buzz"),
        calls_json(FIZZ_CALLS_A),
        calls_json(FIZZ_CALLS_B),
    )
    script.add(
        ("Please solve the given coding question", "truncate_number"),
        solution_json(TRUNCATE_SOLUTION),
        solution_json(TRUNCATE_SOLUTION),
        solution_json(TRUNCATE_SOLUTION),
    )
    script.add(
        ("Please solve the given coding question", "fizz_buzz"),
        solution_json(FIZZ_SOLUTION_IN),
        solution_json(FIZZ_SOLUTION_IN),
        solution_json(FIZZ_SOLUTION_COUNT),
        solution_json(FIZZ_SOLUTION_FROM1),
        solution_json(FIZZ_SOLUTION_FROM1),
        solution_json(FIZZ_SOLUTION_FROM1),
    )

    # tool-free self-check over the math claims
    for unit, factual in SELF_CHECK_MATH.items():
        script.add(
            f"Now complete the following:\n[content]: {unit}",
            json.dumps(
                {
                    "reasoning": f"Re-deriving the arithmetic for {unit.split('=')[0].strip()}.",
                    "error": "None" if factual else "The stated answer looks wrong.",
                    "correction": "None" if factual else "Recompute the value.",
                    "factuality": factual,
                }
            ),
        )
    return script


def build_search_stub():
    pages = {}
    for statement in BERDYCH_CLAIMS + TINDER_CLAIMS:
        page = _confirming_page([f"Reported: {statement}."])
        pages[f"Is it true that {statement}?"] = page
        pages[statement] = page
    pages[ARGENTINA_QUERIES[0]] = _confirming_page(ARGENTINA_EVIDENCE)
    pages[ARGENTINA_QUERIES[1]] = _confirming_page(ARGENTINA_EVIDENCE[1:])
    pages[IRELAND_QUERIES[0]] = _confirming_page(IRELAND_EVIDENCE[:1])
    pages[IRELAND_QUERIES[1]] = _confirming_page(IRELAND_EVIDENCE[1:])

    def search_post(url, headers, body, timeout):
        query = body["q"]
        if query not in pages:
            raise AssertionError(f"no scripted search page for query {query!r}")
        return pages[query]

    return search_post


def build_scholar_stub():
    def scholar_get(url, params, timeout):
        title = params["query"]
        if title not in SCHOLAR_RECORDS:
            return {"data": []}
        return {"data": [SCHOLAR_RECORDS[title]]}

    return scholar_get


class PinnedSandbox(SandboxClient):
    """Sandbox whose live calls answer from the pinned output table."""

    def _call_live(self, request):
        results = []
        for call in request["call_expressions"]:
            key = (request["solution_code"], call)
            if key not in SANDBOX_OUTPUTS:
                raise AssertionError(f"no pinned sandbox output for {key!r}")
            results.append(
                {"status": "ok", "value": SANDBOX_OUTPUTS[key], "stderr_excerpt": ""}
            )
        return {"response": {"results": results}}


# --------------------------------------------------------------------------
# datasets
# --------------------------------------------------------------------------

def _kb_example(response, claims, labels, label):
    return {
        "task": "kbqa",
        "prompt": "Tell me about this.",
        "response": response,
        "gold_response_label": label,
        "gold_claims": [
            {"claim": {"variant": "kb_fact", "statement": s}, "label": l}
            for s, l in zip(claims, labels)
        ],
    }


def _code_example(prompt, response, entry_point, label):
    return {
        "task": "code",
        "prompt": prompt,
        "response": response,
        "gold_response_label": label,
        "gold_claims": [{"claim": {"variant": "code_snippet", "code": response}, "label": label}],
        "extras": {"entry_point": entry_point},
    }


def _math_example(prompt, response, claims, labels, label):
    return {
        "task": "math",
        "prompt": prompt,
        "response": response,
        "gold_response_label": label,
        "gold_claims": [
            {
                "claim": {"variant": "math_calc", "calculation": c, "calculated_answer": a},
                "label": l,
            }
            for (c, a), l in zip(claims, labels)
        ],
    }


def _sci_example(response, citations, labels, label):
    return {
        "task": "scientific",
        "prompt": "Write a short technical overview with citations.",
        "response": response,
        "gold_response_label": label,
        "gold_claims": [
            {
                "claim": {
                    "variant": "citation",
                    "title": c["paper_title"],
                    "year": int(c["paper_pub_year"]),
                    "authors": c["paper_author(s)"],
                },
                "label": l,
            }
            for c, l in zip(citations, labels)
        ],
    }


def build_datasets() -> dict[str, list[dict]]:
    kbqa = [
        _kb_example(BERDYCH_TEXT, BERDYCH_CLAIMS, [True] * 7, True),
        _kb_example(FALSE_PAIR_TEXT, [ARGENTINA_CLAIM, IRELAND_CLAIM], [False, False], False),
        _kb_example(TINDER_TEXT, TINDER_CLAIMS, [True] * 5, True),
    ]
    code = [
        _code_example(HUMANEVAL_2_PROMPT, TRUNCATE_UNDER_TEST, "truncate_number", True),
        _code_example(HUMANEVAL_36_PROMPT, FIZZ_UNDER_TEST, "fizz_buzz", False),
        _code_example(HUMANEVAL_36_PROMPT, FIZZ_UNDER_TEST, "fizz_buzz", False),
    ]
    math = [
        _math_example(CIRCLE_PROMPT, CIRCLE_SOLUTION, CIRCLE_CLAIMS, [True, True], True),
        _math_example(DISCOUNT_PROMPT, DISCOUNT_SOLUTION, DISCOUNT_CLAIMS, [True, True], True),
        _math_example(BIGNUM_PROMPT, BIGNUM_SOLUTION, BIGNUM_CLAIMS, BIGNUM_CLAIM_LABELS, False),
    ]
    scientific = [
        _sci_example(REVIEW_1, REVIEW_1_CITATIONS, [True, True], True),
        _sci_example(REVIEW_2, REVIEW_2_CITATIONS, [False, True], False),
    ]
    return {"kbqa": kbqa, "code": code, "math": math, "scientific": scientific}


def write_jsonl(path: Path, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")


# --------------------------------------------------------------------------
# recording
# --------------------------------------------------------------------------

def build_context() -> PipelineContext:
    config = PipelineConfig(mode=Mode.RECORD, fixture_dir=str(FIXTURE_DIR), llm_api_key="scripted")
    ctx = PipelineContext(
        config,
        http_post=build_llm_script(),
        search_post=build_search_stub(),
        scholar_get=build_scholar_stub(),
    )
    ctx.search.api_key = "scripted"
    ctx.sandbox = PinnedSandbox(ctx.store, cmd=None)
    return ctx


def main() -> None:
    if FIXTURE_DIR.exists():
        shutil.rmtree(FIXTURE_DIR)
    datasets = build_datasets()
    for name, rows in datasets.items():
        write_jsonl(DATA_DIR / f"{name}.jsonl", rows)
    audit_rows = [
        datasets["kbqa"][1],
        datasets["code"][0],
        datasets["math"][0],
        datasets["scientific"][0],
    ]
    write_jsonl(DATA_DIR / "audit" / "assistant_a.jsonl", audit_rows)

    ctx = build_context()
    total_claims = 0
    for name in ("kbqa", "code", "math", "scientific"):
        loaded = load_dataset(DATA_DIR / f"{name}.jsonl", Task(name))
        assert not loaded.errors, loaded.errors
        for example in loaded.examples:
            result = run_check_pipeline(
                example.task,
                example.prompt,
                example.response,
                ctx,
                entry_point=example.entry_point,
            )
            total_claims += len(result.verdict.claim_verdicts)
            golds = {c.id: label for c, label in example.gold_claims}
            got = {v.claim_id: v.factuality for v in result.verdict.claim_verdicts}
            assert golds.keys() == got.keys(), (name, example.prompt[:40])

    # tool-free self-check fixtures over the math dataset
    loaded = load_dataset(DATA_DIR / "math.jsonl", Task.MATH)
    for example in loaded.examples:
        run_self_check(example.task, example.prompt, example.response, ctx, shots=0)

    print(f"recorded {ctx.store.count()} fixture files; {total_claims} claims checked")


if __name__ == "__main__":
    main()
