#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <vector>

#include "manetid/detect.hpp"

using namespace manetid;
using namespace manetid::detect;

namespace {

Verdict verdict(double score, bool attack) { return Verdict{0, score, attack}; }

nn::Network zero_logsig_net() {
    nn::Network net = nn::init(nn::make_architecture("4-3-1", nn::Transfer::TanSig), 5);
    for (auto& layer : net.weights) std::fill(layer.begin(), layer.end(), 0.0);
    for (auto& layer : net.biases) std::fill(layer.begin(), layer.end(), 0.0);
    return net;
}

}  // namespace

TEST_CASE("threshold rule is inclusive at the boundary", "[detect]") {
    nn::Network net = zero_logsig_net();
    features::LabeledSample sample{0, 0, {0.1, 0.2, 0.3, 0.4}, 1};
    // zero network with a logsig output scores exactly 0.5
    const Verdict v = classify(net, sample, 0.5);
    CHECK(v.score == 0.5);
    CHECK(v.attack);
    const Verdict above = classify(net, sample, 0.51);
    CHECK_FALSE(above.attack);
}

TEST_CASE("raising the threshold never creates new attack verdicts", "[detect]") {
    Rng rng(7);
    nn::Network net = nn::init(nn::make_architecture("4-5-1", nn::Transfer::TanSig), 9);
    std::vector<features::LabeledSample> samples;
    for (int i = 0; i < 200; ++i)
        samples.push_back({0, i,
                           {rng.next_double(), rng.next_double(), rng.next_double(),
                            rng.next_double()},
                           0});
    for (double lo : {0.2, 0.4, 0.6}) {
        const double hi = lo + 0.2;
        for (const auto& s : samples) {
            const bool attack_lo = classify(net, s, lo).attack;
            const bool attack_hi = classify(net, s, hi).attack;
            if (attack_hi) REQUIRE(attack_lo);
        }
    }
}

TEST_CASE("connection verdicts take the strict majority", "[detect]") {
    std::vector<Verdict> three_of_four{verdict(0.9, true), verdict(0.8, true),
                                       verdict(0.7, true), verdict(0.1, false)};
    CHECK(aggregate_connection(three_of_four).attack);
    CHECK(aggregate_connection(three_of_four).score ==
          Catch::Approx((0.9 + 0.8 + 0.7 + 0.1) / 4));

    std::vector<Verdict> split{verdict(0.9, true), verdict(0.1, false)};
    CHECK_FALSE(aggregate_connection(split).attack);  // a tie is not a majority

    std::vector<Verdict> single{verdict(0.93, true)};
    CHECK(aggregate_connection(single).attack);

    CHECK_THROWS_AS(aggregate_connection({}), EmptyInput);
}

TEST_CASE("both detection-rate definitions are reported", "[detect]") {
    // 10 units, 4 attacks, all 4 detected, no false alarms
    std::vector<Verdict> verdicts;
    std::vector<int> labels;
    for (int i = 0; i < 10; ++i) {
        const bool attack = i < 4;
        verdicts.push_back(verdict(attack ? 0.9 : 0.1, attack));
        labels.push_back(attack ? 1 : 0);
    }
    const DetectionRate dr = detection_rate(verdicts, labels);
    REQUIRE(dr.dr_recall.has_value());
    CHECK(*dr.dr_recall == 1.0);
    CHECK(dr.dr_paper == Catch::Approx(0.4));
}

TEST_CASE("a perfect detector scores recall one", "[detect]") {
    std::vector<Verdict> verdicts;
    std::vector<int> labels;
    for (int i = 0; i < 20; ++i) {
        verdicts.push_back(verdict(0.99, true));
        labels.push_back(1);
    }
    const DetectionRate dr = detection_rate(verdicts, labels);
    CHECK(*dr.dr_recall == 1.0);
    CHECK(dr.dr_paper == 1.0);
    const ConfusionCounts c = confusion(verdicts, labels);
    CHECK(c.fp == 0);
    CHECK(c.fn == 0);
}

TEST_CASE("no attack units leaves recall undefined", "[detect]") {
    std::vector<Verdict> verdicts{verdict(0.9, true), verdict(0.1, false)};
    std::vector<int> labels{0, 0};
    const DetectionRate dr = detection_rate(verdicts, labels);
    CHECK_FALSE(dr.dr_recall.has_value());
    CHECK(dr.dr_paper == 0.0);
}

TEST_CASE("confusion counts against a brute-force recount", "[detect]") {
    Rng rng(23);
    std::vector<Verdict> verdicts;
    std::vector<int> labels;
    for (int i = 0; i < 1000; ++i) {
        verdicts.push_back(verdict(rng.next_double(), rng.next_below(2) == 1));
        labels.push_back(static_cast<int>(rng.next_below(2)));
    }
    const ConfusionCounts c = confusion(verdicts, labels);
    long tp = 0, fp = 0, tn = 0, fn = 0;
    for (int i = 0; i < 1000; ++i) {
        if (labels[static_cast<std::size_t>(i)] && verdicts[static_cast<std::size_t>(i)].attack)
            ++tp;
        if (!labels[static_cast<std::size_t>(i)] && verdicts[static_cast<std::size_t>(i)].attack)
            ++fp;
        if (!labels[static_cast<std::size_t>(i)] && !verdicts[static_cast<std::size_t>(i)].attack)
            ++tn;
        if (labels[static_cast<std::size_t>(i)] && !verdicts[static_cast<std::size_t>(i)].attack)
            ++fn;
    }
    CHECK(c.tp == tp);
    CHECK(c.fp == fp);
    CHECK(c.tn == tn);
    CHECK(c.fn == fn);
    CHECK(c.total() == 1000);

    // dr_paper = dr_recall * attack fraction, up to rounding
    const DetectionRate dr = detection_rate(verdicts, labels);
    if (dr.dr_recall) {
        const double attack_fraction =
            static_cast<double>(tp + fn) / static_cast<double>(c.total());
        CHECK(dr.dr_paper == Catch::Approx(*dr.dr_recall * attack_fraction).margin(1e-12));
    }

    // all-normal labels with all-attack verdicts: fp = n
    std::vector<int> normals(1000, 0);
    std::vector<Verdict> attacks;
    for (int i = 0; i < 1000; ++i) attacks.push_back(verdict(0.9, true));
    CHECK(confusion(attacks, normals).fp == 1000);
}

TEST_CASE("length mismatches are rejected", "[detect]") {
    std::vector<Verdict> verdicts{verdict(0.9, true)};
    std::vector<int> labels{1, 0};
    CHECK_THROWS_AS(confusion(verdicts, labels), LengthMismatch);
}
