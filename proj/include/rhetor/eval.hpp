#pragma once

#include <string>
#include <vector>

#include "rhetor/agents.hpp"
#include "rhetor/domain.hpp"
#include "rhetor/pipeline.hpp"

// Head-to-head judging of simple vs complex outputs, plus scorecard
// aggregation. The judge reports raw criterion scores only; all final-score
// arithmetic and the winner call happen here.

namespace rhetor {

/// Final score on the 0-100 scale: 2.5 x (structure + depth + support +
/// rhetoric). Any criterion outside [0,10] -> RangeError.
double final_score(int structure, int depth, int support, int rhetoric);

/// Compare two statements for the same (topic, persona) under neutral A/B
/// labels. Exact ties are surfaced as Winner::Tie for human adjudication,
/// never silently broken.
ArbiterVerdict arbitrate(const AgentContext& ctx, const PolishedStatement& statement_a,
                         const PolishedStatement& statement_b);

struct BothOrdersResult {
    ArbiterVerdict forward;   // as presented
    ArbiterVerdict reversed;  // labels swapped, scores swapped back
    bool consistent = false;  // same winner either way round
};

/// Optional positional-bias probe: judge both label orders and flag
/// disagreement. Off by default in the experiment flow.
BothOrdersResult arbitrate_both_orders(const AgentContext& ctx,
                                       const PolishedStatement& statement_a,
                                       const PolishedStatement& statement_b);

/// One judged (topic, persona) cell. By convention side A holds the simple
/// model's statement and side B the complex model's.
struct ComparisonCell {
    std::string topic_id;
    std::string topic_label;
    std::string persona_id;
    ArbiterVerdict verdict;
};

/// Aggregate one full panel of verdicts into the scorecard: per-row scores
/// plus overall and per-persona means. A missing (topic, persona) cell ->
/// IncompleteScorecardError.
ScorecardReport aggregate(const std::vector<ComparisonCell>& cells, const Panel& panel);

/// Rebuild a scorecard (averages included) from bare rows, checking that
/// every (topic, persona) pair carries both model rows.
ScorecardReport scorecard_from_rows(std::vector<ScoreRow> rows);

enum class ReportFormat { TextTable, Delimited };

std::string render_report(const ScorecardReport& report, ReportFormat format);

/// Parse the delimited form back into a scorecard. render/parse round-trips.
ScorecardReport parse_scorecard_csv(const std::string& text);

}  // namespace rhetor
