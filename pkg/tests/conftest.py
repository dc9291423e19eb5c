import json

import pytest

from verifact.fixtures import FixtureStore, Mode
from verifact.gateway import LlmGateway


class ScriptedGateway:
    """Build a live-mode gateway whose transport answers from a script.

    The script is a list of (matcher, response_text) pairs; the first
    matcher found in the outgoing user prompt wins. A plain string matcher
    is a substring test.
    """

    def __init__(self, tmp_path, script, mode=Mode.LIVE):
        self.script = list(script)
        self.calls = []

        def fake_post(url, headers, body, timeout):
            user = body["messages"][1]["content"]
            self.calls.append(user)
            for matcher, response in self.script:
                if matcher in user:
                    text = response() if callable(response) else response
                    return {
                        "choices": [{"message": {"content": text}}],
                        "usage": {"prompt_tokens": 1, "completion_tokens": 1},
                    }
            raise AssertionError(f"no scripted response matches prompt: {user[:160]!r}")

        store = FixtureStore(tmp_path / "fixtures", mode)
        self.gateway = LlmGateway(
            store, model_id="scripted", api_key="k", http_post=fake_post, backoff_base=0.0
        )


@pytest.fixture
def scripted_gateway(tmp_path):
    def build(script, mode=Mode.LIVE):
        return ScriptedGateway(tmp_path, script, mode)

    return build


def claims_json(statements):
    return json.dumps([{"claim": s} for s in statements])
