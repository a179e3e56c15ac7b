"""Gender-asymmetry metrics for dialogue corpora.

Quantifies how independently each gender talks in a body of dialogues,
whether those dialogues come from movie scripts or from timestamped
message streams: Bechdel scores, dialogue imbalance, gender independence,
plus the segmentation, gender-inference and statistical machinery needed
to compute and compare them.
"""

from .ingest import (CorpusError, GeoTables, LoadedMessages, Message,
                     MovieRecord, ShareRecord, UserProfile,
                     filter_interacting_pairs, read_geo, read_messages,
                     read_movies, read_profiles, read_shares)
from .gender import (GenderLexicon, ReferenceLexicon, UserAttributes,
                     build_lexicon, detect_references, infer_gender,
                     locate_user, make_reference_lexicon, profile_flags)
from .metrics import (Dialogue, DialogueSet, MetricReport, bechdel_scores,
                      dialogue_imbalance, gender_independence, make_dialogue,
                      metric_report, read_dialogues, select_count,
                      write_dialogues)
from .screenplay import (NotAScreenplayError, ScriptDocument, ScriptLine,
                         build_script_dialogues, classic_bechdel,
                         parse_script, render_script)
from .segmentation import (BimodalFit, FitError, fit_bimodal,
                           inter_event_gaps, split_stream_dialogues)
from .stats import (BootstrapSummary, StatResult, bootstrap_score_centroids,
                    pearson, partial_pearson, proportion_test, spearman,
                    wilcoxon_ranksum, wilson_ci)

__version__ = "0.1.0"
