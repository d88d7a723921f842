#pragma once

// JSON records for configs, transcripts, adversary reports and estimates.
// Key names are part of the report schema (see README); keep them stable.

#include <nlohmann/json.hpp>

#include "qsum/adversary.hpp"
#include "qsum/analysis.hpp"
#include "qsum/protocol.hpp"

namespace qsum {

using nlohmann::json;

inline json to_json(const ProtocolConfig& c) {
    return json{{"n", c.n},
                {"d", c.d},
                {"N", c.N},
                {"q", c.q},
                {"decoys_per_channel", c.decoys_per_channel},
                {"channel_error_threshold", c.channel_error_threshold},
                {"correlation_error_threshold", c.correlation_error_threshold},
                {"seed", c.seed}};
}

inline json to_json(const DecoyRecord& r) {
    json j{{"position", r.position}, {"basis", to_string(r.basis)}, {"value", r.value}};
    j["measured"] = r.measured ? json(*r.measured) : json(nullptr);
    return j;
}

inline json to_json(const ChannelEvent& e) {
    json decoys = json::array();
    for (const auto& r : e.decoys) decoys.push_back(to_json(r));
    return json{{"receiver", e.receiver}, {"length", e.length},  {"decoys", std::move(decoys)},
                {"error_rate", e.error_rate}, {"passed", e.passed}};
}

inline json to_json(const CorrelationEvent& e) {
    json samples = json::array();
    for (const auto& s : e.samples)
        samples.push_back(json{{"state_index", s.state_index},
                               {"basis", to_string(s.basis)},
                               {"announced", s.announced},
                               {"passed", s.passed}});
    return json{{"sampled", e.sampled}, {"samples", std::move(samples)}, {"error_rate", e.error_rate},
                {"passed", e.passed}};
}

inline json to_json(const Transcript& t) {
    json channel = json::array();
    for (const auto& e : t.channel) channel.push_back(to_json(e));
    json announcements = json::array();
    for (const auto& a : t.announcements) announcements.push_back(json{{"party", a.party}, {"payload", a.payload}});
    json j{{"protocol", t.protocol},
           {"config", to_json(t.config)},
           {"strategy", t.strategy},
           {"log", t.log},
           {"channel", std::move(channel)},
           {"announcements", std::move(announcements)},
           {"verdict", to_string(t.verdict)}};
    if (!t.announcement_model.empty()) j["announcement_model"] = t.announcement_model;
    j["correlation"] = t.correlation ? to_json(*t.correlation) : json(nullptr);
    j["published_sum"] = t.published_sum ? json(*t.published_sum) : json(nullptr);
    return j;
}

inline json to_json(const AdversaryReport& r) {
    json recovered = json::array();
    for (const auto& [key, guess] : r.recovered)
        recovered.push_back(json{{"party", key.first}, {"digit", key.second}, {"guess", guess}});
    json eve = json::array();
    for (const auto& e : r.eavesdropper)
        eve.push_back(json{{"receiver", e.receiver},
                           {"position", e.position},
                           {"basis", to_string(e.basis)},
                           {"outcome", e.outcome}});
    json j{{"strategy", r.strategy},
           {"recovered", std::move(recovered)},
           {"detected", r.detected},
           {"eavesdropper", std::move(eve)}};
    j["correct_fraction"] = r.correct_fraction ? json(*r.correct_fraction) : json(nullptr);
    j["detection_stage"] = r.detection_stage ? json(to_string(*r.detection_stage)) : json(nullptr);
    j["escaped_sampling"] = r.escaped_sampling ? json(*r.escaped_sampling) : json(nullptr);
    j["informed"] = r.informed ? json(*r.informed) : json(nullptr);
    return j;
}

inline json to_json(const ExactProbability& p) {
    return json{{"fraction", p.fraction()}, {"value", p.to_double()}};
}

inline json to_json(const MonteCarloEstimate& e) {
    return json{{"trials", e.trials}, {"successes", e.successes}, {"point", e.point}, {"stderr", e.std_error},
                {"seed", e.seed}};
}

}  // namespace qsum
