#pragma once

#include <optional>
#include <span>
#include <vector>

#include "manetid/errors.hpp"
#include "manetid/features.hpp"
#include "manetid/neuralnet.hpp"

// Applies a trained network to samples and aggregates to connection-level
// verdicts; computes the detection-rate metrics.
namespace manetid::detect {

struct Verdict {
    int unit = 0;  // sample index or connection id
    double score = 0.0;
    bool attack = false;
};

struct ConfusionCounts {
    long tp = 0, fp = 0, tn = 0, fn = 0;
    long total() const { return tp + fp + tn + fn; }
};

// score >= threshold classifies as attack (boundary inclusive).
inline Verdict classify(const nn::Network& net, const features::LabeledSample& sample,
                        double threshold, int unit = 0) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must be in (0, 1)");
    const double score = nn::forward(net, sample.x);
    return Verdict{unit, score, score >= threshold};
}

// A connection is classed attack when a strict majority of its window
// verdicts are attack; its score is the mean window score.
inline Verdict aggregate_connection(std::span<const Verdict> windows, int unit = 0) {
    if (windows.empty()) throw EmptyInput("aggregate_connection: no window verdicts");
    double score = 0.0;
    long attacks = 0;
    for (const auto& v : windows) {
        score += v.score;
        if (v.attack) ++attacks;
    }
    return Verdict{unit, score / static_cast<double>(windows.size()),
                   2 * attacks > static_cast<long>(windows.size())};
}

inline ConfusionCounts confusion(std::span<const Verdict> verdicts, std::span<const int> labels) {
    if (verdicts.size() != labels.size())
        throw LengthMismatch("confusion: verdicts and labels differ in length");
    ConfusionCounts c;
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        if (labels[i] != 0)
            verdicts[i].attack ? ++c.tp : ++c.fn;
        else
            verdicts[i].attack ? ++c.fp : ++c.tn;
    }
    return c;
}

struct DetectionRate {
    // tp / (tp + fn); absent when there are no attack units to recall.
    std::optional<double> dr_recall;
    // The literal "correct attacks over the total number of units" reading.
    double dr_paper = 0.0;
};

inline DetectionRate detection_rate(std::span<const Verdict> verdicts,
                                    std::span<const int> labels) {
    const ConfusionCounts c = confusion(verdicts, labels);
    DetectionRate dr;
    if (c.total() > 0) dr.dr_paper = static_cast<double>(c.tp) / static_cast<double>(c.total());
    if (c.tp + c.fn > 0)
        dr.dr_recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    return dr;
}

}  // namespace manetid::detect
