"""Context-aware retrieval, learning-to-rank fusion, and planner evaluation.

The package generates a synthetic persona/context/tool corpus, retrieves
query-relevant context from federated per-persona stores (BM25, hashed
TF-IDF cosine, or a LambdaMART ranker fused with RRF), feeds that context
into tool retrieval and plan generation, and scores every stage with
Recall@K, NDCG@K, and structural plan accuracy.
"""

from .corpus import (APPS, Corpus, ContextItem, ContextStore, LabeledQuery,
                     Persona, Plan, Tool, ToolParam, generate_corpus,
                     item_text, load_corpus, save_corpus, validate_corpus)
from .fusion import (FusionConfig, RetrievalArtifacts, augment_query,
                     artifacts_with_precomputed, build_artifacts,
                     federated_retrieve, hint_augmenter, identity_augmenter,
                     rrf_fuse)
from .ltr import (FEATURE_SCHEMA, LambdaMartRanker, LtrConfig, LtrModel,
                  QueryGroup, extract_features, fit_tree, lambda_gradients,
                  load_model, predict, rank, save_model, train)
from .metrics import (EvalReport, PlanJudgment, PlanMatch, QueryEval,
                      RetrievalJudgment, aggregate, ast_match, ndcg_at_k,
                      recall_at_k)
from .pipeline import (PipelineConfig, PipelineTrace, PIPELINE_PRESETS,
                       evaluate_context, evaluate_e2e, evaluate_tools,
                       mock_plan, retrieve_tools, run_external_planner,
                       run_pipeline)
from .retrieval import (Bm25Params, Embedding, HashedTfidfEmbedder,
                        InvertedIndex, RankedList, bm25_score, bm25_topk,
                        build_index, cosine_topk, embed_hashed_tfidf,
                        load_embeddings, tokenize)
from .training_data import build_training_groups

__version__ = "0.1.0"
