"""consentkit: a consent-signaling protocol engine.

Purpose taxonomies with prefix codebooks and a vocabulary registry,
bit-string policy encoding for HTTP transmission, semantic preference
matching with a bloom prefilter, user-side consent dialogue generation
with a dark-pattern linter, HTML fallback markup, and a website/agent
harness exercising the full loop.
"""

from .dialogue import (
    ApplyResult,
    Control,
    ControlAction,
    ControlKind,
    DialogueSpec,
    Layer,
    LintFinding,
    NoticeElement,
    NoticeField,
    Quality,
    SourceMode,
    apply_human_decision,
    generate_choices_only,
    generate_complete,
    generate_from_template,
    lint,
)
from .markup import MarkupDialogue, emit_markup, parse_markup
from .matching import (
    Constraints,
    Decision,
    DecisionStore,
    Effect,
    Outcome,
    PreferenceRule,
    PrefilterOutcome,
    PrefilterPair,
    ancestors,
    bruteforce_match,
    build_prefilter,
    load_preferences,
    match_request,
    prefilter_check,
)
from .policy import (
    CompactWord,
    CompositePurposeId,
    PolicyBitString,
    decode_base64url,
    decode_policy,
    decode_stripped,
    encode_base64url,
    encode_policy,
    strip_for_header,
)
from .signal import (
    AgentMode,
    AgentService,
    AgentSession,
    SignalFormat,
    SiteConfig,
    WebsiteSimulator,
    fetch_requests,
    run_agent,
    send_decisions,
    serve_requests,
)
from .taxonomy import (
    Codebook,
    ConceptMapping,
    ConceptNode,
    MappingRelation,
    Registry,
    Vocabulary,
    build_codebook,
    flatten,
    load_registry,
    load_vocabulary,
)
from .wire import ConsentRequest, DecisionSignal, Party, parse_requests_document

__version__ = "0.1.0"
