#pragma once

// Registry of independent EPR pairs indexed by topological charge. The Pr
// field carries +l, the Conj field -l; cross-charge correlations are
// structurally unrepresentable (the product structure is an invariant, not a
// runtime property).

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "oamcv/channel.hpp"
#include "oamcv/errors.hpp"
#include "oamcv/gaussian.hpp"

namespace oamcv {

/// One multiplexed channel: the Pr topological charge and the two-mode state
/// of the (Conj, Pr) pair. The Conj field carries the opposite charge.
template <class Scalar>
struct OamPairT {
  int charge;
  GaussianStateT<Scalar> state;
};

using OamPair = OamPairT<double>;

template <class Scalar>
class MultiplexedStateT {
 public:
  MultiplexedStateT() = default;

  void insert(OamPairT<Scalar> pair) {
    const int charge = pair.charge;
    if (!pairs_.emplace(charge, std::move(pair)).second) {
      throw DuplicateCharge("duplicate topological charge " + std::to_string(charge));
    }
  }

  const std::map<int, OamPairT<Scalar>>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }

 private:
  std::map<int, OamPairT<Scalar>> pairs_;
};

using MultiplexedState = MultiplexedStateT<double>;

/// Build one pair per charge, all initialized from the same source.
template <class Scalar>
MultiplexedStateT<Scalar> build_multiplexed(std::span<const int> charges,
                                            const EprParamsT<Scalar>& epr) {
  MultiplexedStateT<Scalar> ms;
  for (const int l : charges) {
    ms.insert({l, initial_state(epr)});
  }
  return ms;
}

/// Heterogeneous overload: per-charge source parameters.
template <class Scalar>
MultiplexedStateT<Scalar> build_multiplexed(
    const std::vector<std::pair<int, EprParamsT<Scalar>>>& sources) {
  MultiplexedStateT<Scalar> ms;
  for (const auto& [l, epr] : sources) {
    ms.insert({l, initial_state(epr)});
  }
  return ms;
}

/// Apply the same channel to the Pr mode of every pair.
template <class Scalar>
MultiplexedStateT<Scalar> apply_channel_all(const MultiplexedStateT<Scalar>& ms,
                                            const ChannelParamsT<Scalar>& ch) {
  MultiplexedStateT<Scalar> out;
  for (const auto& [l, pair] : ms.pairs()) {
    out.insert({l, apply_channel(pair.state, ch)});
  }
  return out;
}

/// Heterogeneous overload: per-charge channel parameters. Every charge in ms
/// must have an entry.
template <class Scalar>
MultiplexedStateT<Scalar> apply_channel_all(
    const MultiplexedStateT<Scalar>& ms,
    const std::map<int, ChannelParamsT<Scalar>>& per_charge) {
  MultiplexedStateT<Scalar> out;
  for (const auto& [l, pair] : ms.pairs()) {
    const auto it = per_charge.find(l);
    if (it == per_charge.end()) {
      throw MissingCharge("no channel parameters for charge " + std::to_string(l));
    }
    out.insert({l, apply_channel(pair.state, it->second)});
  }
  return out;
}

template <class Scalar>
struct ChargeRecordT {
  int charge;
  Scalar ppt;
  Scalar coherence;
  bool entangled;
};

using ChargeRecord = ChargeRecordT<double>;

/// Per-charge metrics plus totals. Coherence is additive over the product
/// structure, so the total is the plain sum.
template <class Scalar>
struct MultiplexReportT {
  std::vector<ChargeRecordT<Scalar>> records;  // ascending charge
  Scalar total_coherence = 0;
  int entangled_count = 0;
};

using MultiplexReport = MultiplexReportT<double>;

template <class Scalar>
MultiplexReportT<Scalar> report(const MultiplexedStateT<Scalar>& ms) {
  MultiplexReportT<Scalar> rep;
  rep.records.reserve(ms.size());
  for (const auto& [l, pair] : ms.pairs()) {
    const Scalar ppt = ppt_value(pair.state);
    const Scalar coherence = relative_entropy_coherence(pair.state);
    const bool entangled = ppt < 1;
    rep.records.push_back({l, ppt, coherence, entangled});
    rep.total_coherence += coherence;
    rep.entangled_count += entangled ? 1 : 0;
  }
  return rep;
}

}  // namespace oamcv
