#include <doctest.h>

#include <cmath>

#include "rhetor/domain.hpp"
#include "rhetor/errors.hpp"
#include "test_support.hpp"

using namespace rhetor;
using testsupport::Rng;

TEST_CASE("canonical dump sorts keys and formats reals") {
    const json a = json::parse(R"({"b":2,"a":1})");
    const json b = json::parse(R"({"a":1,"b":2})");
    CHECK(canonical_dump(a) == canonical_dump(b));
    CHECK(canonical_dump(a) == R"({"a":1,"b":2})");

    CHECK(format_real(2.5) == "2.5");
    CHECK(format_real(75.0) == "75");
    CHECK(format_real(0.70710678) == "0.707107");
    CHECK(format_real(-0.25) == "-0.25");
    CHECK(canonical_dump(json{{"x", 87.5}}) == R"({"x":87.5})");
    CHECK_THROWS_AS(canonical_dump(json{{"x", std::nan("")}}), SerializationError);
}

TEST_CASE("digest is deterministic and key-order independent") {
    CHECK(digest(json{{"a", 1}}) == digest(json{{"a", 1}}));
    CHECK(digest(json{{"a", 1}}) != digest(json{{"a", 2}}));
    CHECK(digest(json::parse(R"({"b":2,"a":1})")) ==
          digest(json::parse(R"({"a":1,"b":2})")));
    CHECK(digest(json{{"a", 1}}).size() == 16);
}

TEST_CASE("canonical form is stable through parse for arbitrary reals") {
    Rng rng(11);
    for (int i = 0; i < 2000; ++i) {
        const double v =
            (rng.real01() - 0.5) * std::pow(10.0, double(rng.below(13)) - 6.0);
        const std::string once = canonical_dump(json{{"v", v}});
        const std::string twice = canonical_dump(json::parse(once));
        CAPTURE(v);
        CHECK(once == twice);
    }
}

namespace {

CandidateScore random_score(Rng& rng, Stance stance) {
    CandidateScore s;
    s.stance = stance;
    s.principles = rng.score();
    s.personality = rng.score();
    s.strength = rng.score();
    s.composite = 0.60 * s.principles + 0.25 * s.personality + 0.15 * s.strength;
    return s;
}

RunRecord random_record(Rng& rng) {
    RunRecord r;
    r.run_id = rng.text(1) + "-run";
    r.persona_id = rng.word();
    r.topic_id = rng.word();
    r.model_kind = rng.below(2) == 0 ? ModelKind::Simple : ModelKind::Complex;
    r.seed = rng.next();
    const int stages = 2 + static_cast<int>(rng.below(3));
    for (int k = 0; k < stages; ++k) {
        StageRecord s;
        s.stage_name = rng.word();
        s.input_digest = digest(json{{"k", k}});
        s.output_document = json{{"text", rng.text(4)}, {"similarity", rng.real01()}};
        s.started_at = "2026-01-01T00:00:00.000Z";
        s.ended_at = "2026-01-01T00:00:01.000Z";
        r.stages.push_back(std::move(s));
    }
    return r;
}

}  // namespace

TEST_CASE("serialize -> parse -> serialize is byte-identical for domain types") {
    Rng rng(23);
    for (int i = 0; i < 200; ++i) {
        const StrategicBrief brief{rng.text(3), rng.text(4), rng.word()};
        const std::string t1 = canonical_dump(to_json(brief));
        CHECK(t1 == canonical_dump(to_json(brief_from_json(json::parse(t1)))));

        Passage p{rng.text(6), rng.word(), rng.word() + ":0", rng.real01() * 2 - 1,
                  QueryOrigin::HistoricalPrecedent};
        ResearchDossier d{{p}};
        const std::string t2 = canonical_dump(to_json(d));
        CHECK(t2 == canonical_dump(to_json(dossier_from_json(json::parse(t2)))));

        ValidationReport v;
        v.per_candidate = {random_score(rng, Stance::Orthodox),
                           random_score(rng, Stance::Unorthodox),
                           random_score(rng, Stance::Pragmatic)};
        v.winner_stance = Stance::Orthodox;
        v.winner_text = rng.text(5);
        const std::string t3 = canonical_dump(to_json(v));
        CHECK(t3 ==
              canonical_dump(to_json(validation_report_from_json(json::parse(t3)))));

        const RunRecord r = random_record(rng);
        const std::string t4 = canonical_run_text(r, true);
        CHECK(t4 == canonical_run_text(run_record_from_json(json::parse(t4)), true));

        ArbiterVerdict verdict;
        verdict.topic_id = rng.word();
        verdict.persona_id = rng.word();
        verdict.scores_a = {rng.score(), rng.score(), rng.score(), rng.score()};
        verdict.scores_b = {rng.score(), rng.score(), rng.score(), rng.score()};
        verdict.final_a = 2.5 * verdict.scores_a.sum();
        verdict.final_b = 2.5 * verdict.scores_b.sum();
        verdict.winner = verdict.final_a > verdict.final_b   ? Winner::A
                         : verdict.final_b > verdict.final_a ? Winner::B
                                                             : Winner::Tie;
        verdict.justification = rng.text(6);
        const std::string t5 = canonical_dump(to_json(verdict));
        CHECK(t5 == canonical_dump(to_json(verdict_from_json(json::parse(t5)))));
    }
}

TEST_CASE("enum mappings reject unknown tokens") {
    CHECK(stance_from_string("unorthodox") == Stance::Unorthodox);
    CHECK_THROWS_AS(stance_from_string("bold"), SchemaError);
    CHECK(model_kind_from_string("complex") == ModelKind::Complex);
    CHECK_THROWS_AS(model_kind_from_string("hybrid"), SchemaError);
    CHECK_THROWS_AS(final_choice_from_string("refute_all"), SchemaError);
    CHECK_THROWS_AS(winner_from_string("draw"), SchemaError);
    CHECK_THROWS_AS(query_origin_from_string("whim"), SchemaError);
}

TEST_CASE("validation report invariants") {
    ValidationReport r;
    r.per_candidate = {
        {Stance::Orthodox, 8, 6, 4, 6.9},
        {Stance::Unorthodox, 6, 10, 10, 7.6},
        {Stance::Pragmatic, 7, 7, 7, 7.0},
    };
    r.winner_stance = Stance::Unorthodox;
    r.winner_text = "winning text";
    CHECK_NOTHROW(validate(r));

    SUBCASE("composite must match the weighting") {
        r.per_candidate[0].composite = 7.2;
        CHECK_THROWS_AS(validate(r), SchemaError);
    }
    SUBCASE("winner must be maximal") {
        r.winner_stance = Stance::Orthodox;
        CHECK_THROWS_AS(validate(r), SchemaError);
    }
    SUBCASE("winner text must be non-empty") {
        r.winner_text.clear();
        CHECK_THROWS_AS(validate(r), SchemaError);
    }
}

TEST_CASE("vulnerability report invariants") {
    VulnerabilityReport r;
    r.attack_vectors = {
        {"first", "internal-flaw", "defense", 7},
        {"second", "internal-flaw", "defense", 3},
        {"third", "internal-flaw", "defense", 5},
    };
    r.critical = {"second", "lowest defensibility"};
    CHECK_NOTHROW(validate(r));

    SUBCASE("critical must be a minimal vector") {
        r.critical.description = "first";
        CHECK_THROWS_AS(validate(r), SchemaError);
    }
    SUBCASE("at least one vector") {
        r.attack_vectors.clear();
        CHECK_THROWS_AS(validate(r), NoVectorsError);
    }
}

TEST_CASE("candidate set arity and stance rules") {
    CandidateSet set;
    set.mode = ThinkMode::Triple;
    set.candidates = {
        {Stance::Orthodox, "t", "b"},
        {Stance::Unorthodox, "t", "b"},
        {Stance::Pragmatic, "t", "b"},
    };
    CHECK_NOTHROW(validate(set));

    SUBCASE("wrong arity") {
        set.candidates.pop_back();
        CHECK_THROWS_AS(validate(set), WrongArityError);
    }
    SUBCASE("single stance is rejected in triple mode") {
        set.candidates[2].stance = Stance::Single;
        CHECK_THROWS_AS(validate(set), SchemaError);
    }
    SUBCASE("single mode wants exactly one single-stance candidate") {
        set.mode = ThinkMode::Single;
        CHECK_THROWS_AS(validate(set), WrongArityError);
        set.candidates = {{Stance::Single, "t", "b"}};
        CHECK_NOTHROW(validate(set));
        set.candidates[0].stance = Stance::Orthodox;
        CHECK_THROWS_AS(validate(set), SchemaError);
    }
}

TEST_CASE("verdict invariants tie winner to the finals") {
    ArbiterVerdict v;
    v.topic_id = "1";
    v.persona_id = "hamilton";
    v.scores_a = {7, 6, 6, 7};
    v.scores_b = {9, 9, 8, 9};
    v.final_a = 65.0;
    v.final_b = 87.5;
    v.winner = Winner::B;
    v.justification = "stronger across criteria";
    CHECK_NOTHROW(validate(v));

    SUBCASE("final must equal 2.5 x criteria sum") {
        v.final_b = 88.0;
        CHECK_THROWS_AS(validate(v), SchemaError);
    }
    SUBCASE("winner must match the comparison") {
        v.winner = Winner::A;
        CHECK_THROWS_AS(validate(v), SchemaError);
    }
    SUBCASE("criterion out of range is a RangeError at parse") {
        json j = to_json(v);
        j["scores_b"]["depth"] = 11;
        CHECK_THROWS_AS(verdict_from_json(j), RangeError);
    }
}

TEST_CASE("score_field distinguishes schema and range problems") {
    CHECK(score_field(json{{"s", 7}}, "s") == 7);
    CHECK(score_field(json{{"s", 7.0}}, "s") == 7);
    CHECK_THROWS_AS(score_field(json{{"s", "7"}}, "s"), SchemaError);
    CHECK_THROWS_AS(score_field(json{{"s", 7.5}}, "s"), SchemaError);
    CHECK_THROWS_AS(score_field(json{{"s", 11}}, "s"), RangeError);
    CHECK_THROWS_AS(score_field(json{{"s", -1}}, "s"), RangeError);
    CHECK_THROWS_AS(score_field(json::object(), "s"), SchemaError);
}

TEST_CASE("records_equal ignores timestamps") {
    Rng rng(5);
    RunRecord a = random_record(rng);
    RunRecord b = a;
    for (auto& s : b.stages) {
        s.started_at = "2030-12-31T23:59:59.000Z";
        s.ended_at = "2031-01-01T00:00:00.000Z";
    }
    CHECK(records_equal(a, b));
    CHECK(canonical_run_text(a, true) != canonical_run_text(b, true));
    b.stages[0].output_document["text"] = "tampered";
    CHECK_FALSE(records_equal(a, b));
}
