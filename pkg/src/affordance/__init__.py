"""Affordance extraction from word vectors and affordance-pruned Q-learning for text games."""

from .embeddings import (EmbeddingStore, Lexicon, TokenNotFound, cosine, load_embeddings,
                         lookup, nearest)
from .affordance import (CanonicalPairSet, AffordanceModel, ProjectionAxis, DEFAULT_PAIRS,
                         DEFAULT_AXIS, build_affordance_model, affordant_verbs, make_axis,
                         manipulability_score, rank_manipulable, project_2d)
from .action_space import (StrategyKind, StrategyParams, VerbInventory, ActionSpace,
                           CooccurrenceTable, ConceptNetClient, verbs_for, build_cooccurrence,
                           conceptnet_capableof)
from .text_env import EnvObservation, ScriptedWorld, ScriptedEnv, ExternalEnv, load_world, parse_score
from .agent import (Agent, AgentConfig, QTable, GameAction, EpsilonSchedule, hash_state,
                    extract_nouns, select_noun, choose_action, q_update, run_epoch)

__version__ = "0.1.0"
