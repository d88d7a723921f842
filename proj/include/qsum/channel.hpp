#pragma once

// Simulator-side bookkeeping for distributed qudits and decoy-protected
// quantum channels.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "qsum/qudit.hpp"
#include "qsum/random.hpp"

namespace qsum {

using PartyId = int;  // 1-based, P1 is the state preparer

/// One site of one jointly-held entangled state.
struct StateRef {
    std::size_t state;
    std::size_t site;
    bool operator==(const StateRef&) const = default;
};

/// Index into the register's decoy pool.
struct DecoySlot {
    std::size_t decoy;
    bool operator==(const DecoySlot&) const = default;
};

using Slot = std::variant<StateRef, DecoySlot>;

struct QuditSequence {
    PartyId owner;
    std::vector<Slot> slots;
};

struct DecoyRecord {
    std::size_t position;  // index in the transmitted sequence
    Basis basis;
    int value;
    std::optional<int> measured;
};

/// All quantum systems alive in one protocol run. Entangled states stay whole;
/// parties hold StateRefs into them.
class QuantumRegister {
public:
    explicit QuantumRegister(Dimension d) : d_(d) {}

    int dim() const noexcept { return d_.value(); }
    Dimension dimension() const noexcept { return d_; }

    std::size_t add_state(PureState s) {
        if (s.dim() != dim()) throw std::invalid_argument("register: dimension mismatch");
        states_.push_back(std::move(s));
        return states_.size() - 1;
    }

    std::size_t add_decoy(PureState s) {
        if (s.dim() != dim() || s.sites() != 1) throw std::invalid_argument("register: decoy must be one qudit");
        decoys_.push_back(std::move(s));
        return decoys_.size() - 1;
    }

    const PureState& state(std::size_t i) const { return states_.at(i); }
    const PureState& decoy(std::size_t i) const { return decoys_.at(i); }
    std::size_t state_count() const noexcept { return states_.size(); }

    void apply(StateRef ref, const SingleQuditUnitary& op) {
        auto& s = states_.at(ref.state);
        s = apply_single(s, ref.site, op);
    }

    int measure(StateRef ref, Basis basis, Sampler& nature) {
        auto& s = states_.at(ref.state);
        auto [record, collapsed] = measure_site(s, ref.site, basis, nature);
        s = std::move(collapsed);
        return record.outcome;
    }

    void apply(DecoySlot slot, const SingleQuditUnitary& op) {
        auto& s = decoys_.at(slot.decoy);
        s = apply_single(s, 0, op);
    }

    int measure(DecoySlot slot, Basis basis, Sampler& nature) {
        auto& s = decoys_.at(slot.decoy);
        auto [record, collapsed] = measure_site(s, 0, basis, nature);
        s = std::move(collapsed);
        return record.outcome;
    }

    int measure(const Slot& slot, Basis basis, Sampler& nature) {
        return std::visit([&](auto ref) { return measure(ref, basis, nature); }, slot);
    }

    PureState eigenstate(Basis basis, int value) const {
        const int digit[1] = {value};
        auto s = PureState::basis_state(d_, digit);
        if (basis == Basis::Fourier) s = apply_single(s, 0, fourier_transform(d_));
        return s;
    }

private:
    Dimension d_;
    std::vector<PureState> states_;
    std::vector<PureState> decoys_;
};

/// A sequence in flight from P1 to one receiver, with the sender's private
/// decoy records.
struct ChannelStream {
    PartyId receiver;
    std::vector<Slot> slots;
    std::vector<DecoyRecord> decoys;
};

/// Interleave `count` fresh decoys at uniformly random positions of `payload`.
/// Each decoy is a uniformly random eigenstate of a uniformly random basis.
inline ChannelStream insert_decoys(QuantumRegister& reg, PartyId receiver, std::span<const Slot> payload,
                                   int count, Sampler& sender) {
    if (count < 0) throw std::invalid_argument("decoy count must be >= 0");
    const std::size_t total = payload.size() + static_cast<std::size_t>(count);
    std::vector<std::size_t> order(total);
    for (std::size_t i = 0; i < total; ++i) order[i] = i;
    // Partial Fisher-Yates: the first `count` entries become decoy positions.
    for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i) {
        const std::size_t j = i + sender.below(total - i);
        std::swap(order[i], order[j]);
    }
    std::vector<bool> is_decoy(total, false);
    for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i) is_decoy[order[i]] = true;

    ChannelStream stream{receiver, {}, {}};
    stream.slots.reserve(total);
    std::size_t next_payload = 0;
    for (std::size_t pos = 0; pos < total; ++pos) {
        if (is_decoy[pos]) {
            const Basis basis = sender.coin() ? Basis::Fourier : Basis::Computational;
            const int value = sender.below(reg.dim());
            const std::size_t id = reg.add_decoy(reg.eigenstate(basis, value));
            stream.slots.emplace_back(DecoySlot{id});
            stream.decoys.push_back(DecoyRecord{pos, basis, value, std::nullopt});
        } else {
            stream.slots.push_back(payload[next_payload++]);
        }
    }
    return stream;
}

/// Receiver measures each decoy in the basis the sender announces.
inline std::vector<int> measure_decoys(QuantumRegister& reg, const ChannelStream& stream, Sampler& nature) {
    std::vector<int> results;
    results.reserve(stream.decoys.size());
    for (const auto& rec : stream.decoys) {
        const auto& slot = stream.slots.at(rec.position);
        const auto* decoy = std::get_if<DecoySlot>(&slot);
        if (decoy == nullptr) throw std::logic_error("decoy record points at a payload slot");
        results.push_back(reg.measure(*decoy, rec.basis, nature));
    }
    return results;
}

/// Fraction of decoys whose measured value differs from the prepared one.
inline double decoy_check(std::span<const DecoyRecord> sender_records, std::span<const int> receiver_results) {
    if (sender_records.size() != receiver_results.size())
        throw std::invalid_argument("decoy_check: record/result length mismatch");
    if (sender_records.empty()) return 0.0;
    std::size_t errors = 0;
    for (std::size_t i = 0; i < sender_records.size(); ++i)
        if (sender_records[i].value != receiver_results[i]) ++errors;
    return static_cast<double>(errors) / static_cast<double>(sender_records.size());
}

/// Drop decoy slots, keeping payload order.
inline std::vector<StateRef> strip_decoys(std::span<const Slot> slots) {
    std::vector<StateRef> out;
    for (const auto& s : slots)
        if (const auto* ref = std::get_if<StateRef>(&s)) out.push_back(*ref);
    return out;
}

}  // namespace qsum
