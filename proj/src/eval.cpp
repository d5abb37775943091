#include "rhetor/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "rhetor/errors.hpp"

namespace rhetor {

double final_score(int structure, int depth, int support, int rhetoric) {
    for (int v : {structure, depth, support, rhetoric}) {
        if (v < 0 || v > 10) {
            throw RangeError("criterion score " + std::to_string(v) + " outside [0,10]");
        }
    }
    return 2.5 * (structure + depth + support + rhetoric);
}

ArbiterVerdict arbitrate(const AgentContext& ctx, const PolishedStatement& statement_a,
                         const PolishedStatement& statement_b) {
    auto bindings = std::map<std::string, std::string>{
        {"question", ctx.topic.question},
        {"statement_a", statement_a.text},
        {"statement_b", statement_b.text},
    };
    const json obj = agent_extract(ctx, "arbiter", bindings, "arbiter");

    ArbiterVerdict verdict;
    verdict.topic_id = ctx.topic.topic_id;
    verdict.persona_id = ctx.persona.persona_id;
    if (!obj.contains("scores_a")) throw SchemaError("scores_a", "missing");
    if (!obj.contains("scores_b")) throw SchemaError("scores_b", "missing");
    verdict.scores_a = criterion_scores_from_json(obj["scores_a"]);
    verdict.scores_b = criterion_scores_from_json(obj["scores_b"]);
    verdict.justification = string_field(obj, "justification");

    // Finals and the winner are computed here, never taken from the judge.
    verdict.final_a = final_score(verdict.scores_a.structure, verdict.scores_a.depth,
                                  verdict.scores_a.support, verdict.scores_a.rhetoric);
    verdict.final_b = final_score(verdict.scores_b.structure, verdict.scores_b.depth,
                                  verdict.scores_b.support, verdict.scores_b.rhetoric);
    if (verdict.final_a > verdict.final_b) {
        verdict.winner = Winner::A;
    } else if (verdict.final_b > verdict.final_a) {
        verdict.winner = Winner::B;
    } else {
        verdict.winner = Winner::Tie;
    }
    validate(verdict);
    return verdict;
}

BothOrdersResult arbitrate_both_orders(const AgentContext& ctx,
                                       const PolishedStatement& statement_a,
                                       const PolishedStatement& statement_b) {
    BothOrdersResult result;
    result.forward = arbitrate(ctx, statement_a, statement_b);

    ArbiterVerdict swapped = arbitrate(ctx, statement_b, statement_a);
    // Re-express the swapped verdict in the original labeling.
    result.reversed = swapped;
    result.reversed.scores_a = swapped.scores_b;
    result.reversed.scores_b = swapped.scores_a;
    result.reversed.final_a = swapped.final_b;
    result.reversed.final_b = swapped.final_a;
    if (swapped.winner == Winner::A) result.reversed.winner = Winner::B;
    if (swapped.winner == Winner::B) result.reversed.winner = Winner::A;

    result.consistent = result.forward.winner == result.reversed.winner;
    return result;
}

// ---------------------------------------------------------------------------
// Aggregation

namespace {

ScoreRow make_row(const ComparisonCell& cell, ModelKind kind) {
    ScoreRow row;
    row.topic_id = cell.topic_id;
    row.topic_label = cell.topic_label;
    row.persona_id = cell.persona_id;
    row.model_kind = kind;
    if (kind == ModelKind::Simple) {
        row.final_score = cell.verdict.final_a;
        row.criteria = cell.verdict.scores_a;
    } else {
        row.final_score = cell.verdict.final_b;
        row.criteria = cell.verdict.scores_b;
    }
    return row;
}

void fill_averages(ScorecardReport& report) {
    double simple_sum = 0, complex_sum = 0;
    std::size_t simple_n = 0, complex_n = 0;
    std::map<std::string, std::pair<std::pair<double, std::size_t>,
                                    std::pair<double, std::size_t>>>
        per_persona;
    for (const auto& row : report.rows) {
        auto& slot = per_persona[row.persona_id];
        if (row.model_kind == ModelKind::Simple) {
            simple_sum += row.final_score;
            ++simple_n;
            slot.first.first += row.final_score;
            ++slot.first.second;
        } else {
            complex_sum += row.final_score;
            ++complex_n;
            slot.second.first += row.final_score;
            ++slot.second.second;
        }
    }
    if (simple_n == 0 || complex_n == 0) {
        throw IncompleteScorecardError(
            std::vector<std::pair<std::string, std::string>>{{"<any>", "<any>"}});
    }
    report.overall_avg.simple = simple_sum / static_cast<double>(simple_n);
    report.overall_avg.complex_ = complex_sum / static_cast<double>(complex_n);
    for (const auto& [persona, sums] : per_persona) {
        report.per_persona_avg[persona] = ModelAverages{
            sums.first.first / static_cast<double>(sums.first.second),
            sums.second.first / static_cast<double>(sums.second.second)};
    }
}

std::string capitalize(const std::string& s) {
    std::string out = s;
    if (!out.empty()) out[0] = static_cast<char>(std::toupper(out[0]));
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string sanitize_delimited(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    return s;
}

constexpr const char* kCsvHeader =
    "Q_ID,Topic,Agent,Model Type,Final Score,Structure Score,Depth Score,"
    "Support Score,Rhetoric Score";

}  // namespace

ScorecardReport aggregate(const std::vector<ComparisonCell>& cells, const Panel& panel) {
    std::vector<std::pair<std::string, std::string>> missing;
    ScorecardReport report;
    for (const auto& topic : panel.topics) {
        for (const auto& persona : panel.personas) {
            const auto cell = std::find_if(
                cells.begin(), cells.end(), [&](const ComparisonCell& c) {
                    return c.topic_id == topic.topic_id &&
                           c.persona_id == persona.persona_id;
                });
            if (cell == cells.end()) {
                missing.emplace_back(topic.topic_id, persona.persona_id);
                continue;
            }
            report.rows.push_back(make_row(*cell, ModelKind::Simple));
            report.rows.push_back(make_row(*cell, ModelKind::Complex));
        }
    }
    if (!missing.empty()) throw IncompleteScorecardError(std::move(missing));
    fill_averages(report);
    return report;
}

ScorecardReport scorecard_from_rows(std::vector<ScoreRow> rows) {
    std::vector<std::pair<std::string, std::string>> missing;
    std::map<std::pair<std::string, std::string>, std::pair<bool, bool>> seen;
    for (const auto& row : rows) {
        auto& slot = seen[{row.topic_id, row.persona_id}];
        (row.model_kind == ModelKind::Simple ? slot.first : slot.second) = true;
    }
    for (const auto& [cell, sides] : seen) {
        if (!sides.first || !sides.second) missing.push_back(cell);
    }
    if (rows.empty()) missing.emplace_back("<any>", "<any>");
    if (!missing.empty()) throw IncompleteScorecardError(std::move(missing));

    ScorecardReport report;
    report.rows = std::move(rows);
    fill_averages(report);
    return report;
}

std::string render_report(const ScorecardReport& report, ReportFormat format) {
    if (format == ReportFormat::Delimited) {
        std::string out = std::string(kCsvHeader) + "\n";
        for (const auto& row : report.rows) {
            out += sanitize_delimited(row.topic_id) + ",";
            out += sanitize_delimited(row.topic_label) + ",";
            out += sanitize_delimited(row.persona_id) + ",";
            out += capitalize(to_string(row.model_kind)) + ",";
            out += format_real(row.final_score) + ",";
            out += std::to_string(row.criteria.structure) + ",";
            out += std::to_string(row.criteria.depth) + ",";
            out += std::to_string(row.criteria.support) + ",";
            out += std::to_string(row.criteria.rhetoric) + "\n";
        }
        return out;
    }

    char line[256];
    std::string out;
    std::snprintf(line, sizeof line, "%-6s %-14s %-12s %-8s %7s %6s %6s %8s %9s\n",
                  "Q_ID", "Topic", "Agent", "Model", "Final", "Struct", "Depth",
                  "Support", "Rhetoric");
    out += line;
    out += std::string(82, '-') + "\n";
    for (const auto& row : report.rows) {
        std::snprintf(line, sizeof line, "%-6s %-14s %-12s %-8s %7s %6d %6d %8d %9d\n",
                      row.topic_id.c_str(), row.topic_label.c_str(),
                      row.persona_id.c_str(),
                      capitalize(to_string(row.model_kind)).c_str(),
                      format_real(row.final_score).c_str(), row.criteria.structure,
                      row.criteria.depth, row.criteria.support, row.criteria.rhetoric);
        out += line;
    }
    out += std::string(82, '-') + "\n";
    std::snprintf(line, sizeof line, "overall average   simple %6.2f   complex %6.2f\n",
                  report.overall_avg.simple, report.overall_avg.complex_);
    out += line;
    for (const auto& [persona, avg] : report.per_persona_avg) {
        std::snprintf(line, sizeof line, "%-16s  simple %6.2f   complex %6.2f\n",
                      persona.c_str(), avg.simple, avg.complex_);
        out += line;
    }
    return out;
}

ScorecardReport parse_scorecard_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<ScoreRow> rows;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != kCsvHeader) {
                throw ConfigError("scorecard header must be exactly: " +
                                  std::string(kCsvHeader));
            }
            header_seen = true;
            continue;
        }
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 9) {
            throw ConfigError("scorecard line " + std::to_string(line_no) + " has " +
                              std::to_string(fields.size()) + " fields, expected 9");
        }
        ScoreRow row;
        row.topic_id = fields[0];
        row.topic_label = fields[1];
        row.persona_id = fields[2];
        row.model_kind = model_kind_from_string(lower(fields[3]));
        try {
            row.final_score = std::stod(fields[4]);
            row.criteria.structure = std::stoi(fields[5]);
            row.criteria.depth = std::stoi(fields[6]);
            row.criteria.support = std::stoi(fields[7]);
            row.criteria.rhetoric = std::stoi(fields[8]);
        } catch (const std::exception&) {
            throw ConfigError("bad numeric field on scorecard line " +
                              std::to_string(line_no));
        }
        rows.push_back(std::move(row));
    }
    return scorecard_from_rows(std::move(rows));
}

}  // namespace rhetor
