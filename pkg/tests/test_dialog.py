"""Dialog alternation, per-agent message views, and distillation re-asks."""

import pytest

from ideamine.dialog import (
    AgentRole,
    Transcript,
    default_roles,
    distill,
    has_procedure_headers,
    render_transcript_markdown,
    run_dialog,
)
from ideamine.errors import DialogAborted, DistillParseFailure, PreconditionError

from conftest import make_gateway, procedure_text, sb


def roles_with(gen_replies, asst_replies):
    gateway = make_gateway(gen=gen_replies, asst=asst_replies)
    return default_roles(gateway), gateway


class TestRunDialog:
    def test_one_turn_two_messages(self):
        roles, _ = roles_with(["g1"], ["a1"])
        t = run_dialog(roles, "start here", 1)
        assert t.turns == [("generator", "g1"), ("assistant", "a1")]

    def test_three_turns_alternate_generator_first(self):
        roles, _ = roles_with(["g1", "g2", "g3"], ["a1", "a2", "a3"])
        t = run_dialog(roles, "opener", 3)
        assert len(t.turns) == 6
        assert [r for r, _ in t.turns] == [
            "generator",
            "assistant",
            "generator",
            "assistant",
            "generator",
            "assistant",
        ]

    def test_scripted_echo_contents(self):
        roles, _ = roles_with(["g1", "g2"], ["a1", "a2"])
        t = run_dialog(roles, "opener", 2)
        assert [c for _, c in t.turns] == ["g1", "a1", "g2", "a2"]

    def test_agent_views_opener_and_role_mapping(self):
        roles, gateway = roles_with(["g1", "g2"], ["a1", "a2"])
        run_dialog(roles, "the opener", 2)

        # Generator's second call: opener, own g1 as assistant, peer a1 as user.
        second = gateway.generator.calls[1].messages
        assert second[0].role == "system"
        assert (second[1].role, second[1].content) == ("user", "the opener")
        assert (second[2].role, second[2].content) == ("assistant", "g1")
        assert (second[3].role, second[3].content) == ("user", "a1")

        # Assistant's first call sees the generator turn as user-authored.
        first = gateway.assistant.calls[0].messages
        assert (first[1].role, first[1].content) == ("user", "the opener")
        assert (first[2].role, first[2].content) == ("user", "g1")

    def test_empty_opener(self):
        roles, _ = roles_with(["x"], ["y"])
        with pytest.raises(PreconditionError):
            run_dialog(roles, "  ", 1)

    def test_turn_count_bounds(self):
        roles, _ = roles_with(["x"], ["y"])
        with pytest.raises(PreconditionError):
            run_dialog(roles, "o", 0)
        with pytest.raises(PreconditionError):
            run_dialog(roles, "o", 9)

    def test_distinct_role_names_required(self):
        gateway = make_gateway(gen=["x"], asst=["y"])
        twin = (
            AgentRole("generator", "s", gateway.generator),
            AgentRole("generator", "s", gateway.assistant),
        )
        with pytest.raises(PreconditionError):
            run_dialog(twin, "o", 1)

    def test_abort_preserves_partial_transcript(self):
        roles, _ = roles_with(["g1"], [])  # assistant script empty
        with pytest.raises(DialogAborted) as exc:
            run_dialog(roles, "o", 1)
        assert exc.value.partial.turns == [("generator", "g1")]

    def test_empty_reply_aborts(self):
        roles, _ = roles_with(["   "], ["a1"])
        with pytest.raises(DialogAborted):
            run_dialog(roles, "o", 1)

    def test_context_budget_drops_oldest_pair(self):
        roles, gateway = roles_with(["g1", "g2", "g3"], ["a1", "a2", "a3"])
        run_dialog(roles, "opener", 3, context_char_budget=90)
        final_view = gateway.generator.calls[2].messages
        contents = [m.content for m in final_view]
        assert "opener" in contents  # the opener is never dropped
        assert "g1" not in contents and "a1" not in contents


class TestDistill:
    def test_summary_stored_on_transcript(self):
        roles, _ = roles_with([], ["the distilled summary"])
        t = Transcript(opener="o", turns=[("generator", "g"), ("assistant", "a")])
        out = distill(t, "summary", roles[1])
        assert out == "the distilled summary"
        assert t.distilled == "the distilled summary"

    def test_procedure_reask_twice_then_valid(self):
        ok = procedure_text()
        asst = ["no sections here", "Materials only\n- x", ok]
        roles, gateway = roles_with([], asst)
        t = Transcript(opener="o", turns=[("generator", "g"), ("assistant", "a")])
        out = distill(t, "procedure", roles[1])
        assert out == ok
        assert len(gateway.assistant.calls) == 3  # success on attempt 3

    def test_procedure_parse_failure_after_reasks(self):
        roles, _ = roles_with([], ["bad", "bad", "bad"])
        t = Transcript(opener="o", turns=[("generator", "g"), ("assistant", "a")])
        with pytest.raises(DistillParseFailure):
            distill(t, "procedure", roles[1])

    def test_empty_transcript_rejected(self):
        roles, _ = roles_with([], ["x"])
        with pytest.raises(PreconditionError):
            distill(Transcript(opener="o"), "summary", roles[1])

    def test_unknown_mode(self):
        roles, _ = roles_with([], ["x"])
        t = Transcript(opener="o", turns=[("generator", "g"), ("assistant", "a")])
        with pytest.raises(PreconditionError):
            distill(t, "poem", roles[1])

    def test_distill_goes_to_assistant_backend(self):
        roles, gateway = roles_with([], ["summary text"])
        t = Transcript(opener="o", turns=[("generator", "g"), ("assistant", "a")])
        distill(t, "summary", roles[1])
        assert len(gateway.assistant.calls) == 1
        assert len(gateway.generator.calls) == 0


class TestHelpers:
    def test_header_detection(self):
        assert has_procedure_headers(procedure_text())
        assert has_procedure_headers("## Materials\nx\n# Steps\n1. a\nNOTES\n- b")
        assert not has_procedure_headers("Materials\n- x\nSteps\n1. y")  # notes missing

    def test_transcript_round_trip(self):
        t = Transcript(opener="o", turns=[("generator", "g")], distilled="d")
        assert Transcript.from_dict(t.to_dict()) == t

    def test_markdown_render_contains_turns(self):
        t = Transcript(opener="op", turns=[("generator", "gg"), ("assistant", "aa")])
        md = render_transcript_markdown(t)
        assert "op" in md and "gg" in md and "aa" in md
