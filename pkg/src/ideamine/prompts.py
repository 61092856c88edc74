"""Prompt templates for every model-facing operation.

Templates are plain format strings so the exact text sent to a backend is
auditable; run records snapshot the role system prompts verbatim.
"""

# --- divergent idea generation ----------------------------------------------

DIVERGENT_SYSTEM = (
    "You are a research ideation engine for bioinspired materials. "
    "You propose concrete, technically grounded concepts and never repeat yourself."
)

CONTEXT_BLOCK = "Source material (cite nothing outside it):\n{context}\n\n"

DIVERGENT_USER = (
    "{context_block}Task: {prompt}\n\n"
    "Generate {count} distinct ideas as a numbered list, one idea per line. "
    "Each idea must be specific enough to act on."
)

SINGLE_SHOT_USER = "{context_block}Task: {prompt}\n\nList your ideas as a numbered list."

# --- judge scoring -----------------------------------------------------------

JUDGE_SYSTEM = (
    "You are a strict reviewer. Always answer in exactly this form:\n"
    "SCORE: <number>\n"
    "RATIONALE: <one sentence>"
)

CRITERION_DEFINITIONS = {
    "novelty": "how original the idea is relative to what is already established",
    "effectiveness": "how likely the idea is to work and to matter if it does",
}

SCORE_IDEA_USER = (
    "Criterion: {criterion} ({definition}).\n"
    "Scale: {lo} (worst) to {hi} (best).\n\n"
    "Idea:\n{idea}\n"
)

REASK_SUFFIX = (
    "\nYour previous reply could not be parsed. Answer again, exactly in the form:\n"
    "SCORE: <number between {lo} and {hi}>\nRATIONALE: <one sentence>"
)

# --- two-agent dialog ---------------------------------------------------------

GENERATOR_ROLE_SYSTEM = (
    "You are the domain specialist in a two-person working session on "
    "bioinspired materials. Contribute mechanisms, materials choices, and "
    "quantitative detail. Build on your partner's points; keep turns short."
)

ASSISTANT_ROLE_SYSTEM = (
    "You are the critical collaborator in a two-person working session. "
    "Probe weaknesses, ask for specifics, and push the discussion toward "
    "something executable. Keep turns short."
)

REFINEMENT_OPENER = (
    "Original task: {prompt}\n\n"
    "Selected idea to elaborate:\n{idea}\n\n"
    "Work out how this idea would actually be realised: mechanisms, "
    "materials, risks, and concrete next steps."
)

SUMMARY_USER = (
    "Summarize the working session below into a single distilled summary: "
    "the core concept, why it could work, and the agreed next steps.\n\n"
    "Conversation:\n{conversation}"
)

PROCEDURE_SKELETON = (
    "Title: <short title>\n\n"
    "Materials\n- <one per line>\n\n"
    "Steps\n1. <numbered, imperative>\n\n"
    "Notes\n- <cautions, open parameters>"
)

PROCEDURE_DISTILL_USER = (
    "Review the working session below and write the final laboratory "
    "procedure it converged on. Use exactly this layout:\n\n"
    "{skeleton}\n\n"
    "Conversation:\n{conversation}"
)

DISTILL_REASK_SUFFIX = (
    "\nYour previous reply was missing required sections. Rewrite the full "
    "procedure with Materials, Steps, and Notes sections."
)

# --- procedure design ---------------------------------------------------------

QA_QUESTIONS_USER = (
    "Before designing anything, list {count} short technical questions whose "
    "answers are needed to complete this task well:\n{prompt}\n\n"
    "Numbered list, one question per line, no answers."
)

QA_MORE_QUESTIONS_USER = (
    "List {count} additional technical questions about the same task, "
    "different from these:\n{existing}\n\nNumbered list only."
)

QA_ANSWER_USER = (
    "{context_block}Question: {question}\n\n"
    "Answer concisely and technically, in at most a short paragraph."
)

QA_BLOCK_HEADER = "Technical grounding gathered beforehand:"

PROCEDURE_OPENER_WITH_QA = (
    "Design a laboratory procedure for: {prompt}\n\n"
    "{qa_header}\n{qa_block}\n\n"
    "Use the grounding above. Discuss the design together, then converge on "
    "one complete procedure."
)

PROCEDURE_OPENER_NO_QA = (
    "Design a laboratory procedure for: {prompt}\n\n"
    "Discuss the design together, then converge on one complete procedure."
)

SINGLE_AGENT_PROCEDURE_USER = (
    "{opener}\n\nWrite the complete procedure now. Use exactly this layout:\n\n{skeleton}"
)

# --- categorisation ------------------------------------------------------------

CATEGORY_LABELS_USER = (
    "Propose between 5 and 10 short category labels that cover the ideas "
    "below. Numbered list of labels only, no commentary.\n\nIdeas:\n{ideas}"
)

CATEGORY_ASSIGN_USER = (
    "Available labels: {labels}\n\n"
    "Idea: {idea}\n\n"
    "Reply exactly: LABEL: <one label copied from the list>"
)

# --- evaluation -----------------------------------------------------------------

KEYWORDS_USER = (
    "Pick 3 to 5 literature-search keywords for the item below.\n"
    "Reply exactly: KEYWORDS: <kw1>; <kw2>; <kw3>\n\n"
    "Item:\n{item}"
)

KEYWORDS_REASK_SUFFIX = (
    "\nYour previous reply did not contain 3 to 5 keywords. Reply again, "
    "exactly: KEYWORDS: <kw1>; <kw2>; <kw3>"
)

NO_HITS_MARKER = "No similar prior literature was retrieved."

NOVELTY_JUDGE_USER = (
    "Judge how novel the item below is against the retrieved prior "
    "literature. Scale 0 (already published) to 10 (no precedent found).\n\n"
    "Item:\n{item}\n\n"
    "Retrieved prior literature:\n{hits_block}\n\n"
    "Answer in the form:\nSCORE: <0-10>\nRATIONALE: <one sentence>"
)

RUBRIC_ITEM_USER = (
    "Metric: {metric} ({definition}).\n"
    "Scale: {lo} (worst) to {hi} (best).\n\n"
    "Item {item_id}:\n{text}\n\n"
    "Answer in the form:\nSCORE: <number>\nRATIONALE: <one sentence>"
)

RUBRIC_LIST_USER = (
    "Metric: {metric} ({definition}).\n"
    "Scale: {lo} (worst) to {hi} (best).\n"
    "Judge the whole list: near-duplicates must pull scores down.\n\n"
    "Items:\n{items_block}\n\n"
    "Answer with one line per item, in the form:\n"
    "<item id>: SCORE: <number> RATIONALE: <one sentence>"
)

# --- follow-up -------------------------------------------------------------------

FOLLOWUP_USER = (
    "Current procedure:\n{raw}\n\n"
    "Follow-up question: {question}\n\n"
    "Answer the question directly. If the procedure itself should change, "
    "also include the full revised procedure in the same "
    "Title/Materials/Steps/Notes layout."
)
