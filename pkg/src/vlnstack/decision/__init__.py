from .logits import CandidateLogits, fuse_branch_logits, softmax
from .panorama import PanoramaLayout, candidate_markers, project_to_panorama, rear_mask_region
from .prompt import (
    HistoryStep,
    StepContext,
    StructuredPrompt,
    build_structured_prompt,
    parse_candidates,
    parse_sections,
)
from .stubs import (
    PlannerSkill,
    ReasonerSkill,
    ScriptedReasoner,
    noisy_expert_planner,
    optimal_index,
    scripted_reasoner,
)

__all__ = [
    "CandidateLogits",
    "HistoryStep",
    "PanoramaLayout",
    "PlannerSkill",
    "ReasonerSkill",
    "ScriptedReasoner",
    "StepContext",
    "StructuredPrompt",
    "build_structured_prompt",
    "candidate_markers",
    "fuse_branch_logits",
    "noisy_expert_planner",
    "optimal_index",
    "parse_candidates",
    "parse_sections",
    "project_to_panorama",
    "rear_mask_region",
    "scripted_reasoner",
    "softmax",
]
