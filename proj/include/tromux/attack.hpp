#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tromux/locking.hpp"
#include "tromux/netlist.hpp"

namespace tromux {

/// Per-bit key guess; 'X' marks an undeciphered bit.
struct Prediction {
    std::string bits; // each char one of 0 1 X
};

/// File format: `keylen=k` header, then one character per line.
std::string write_prediction(const Prediction& p);
Prediction parse_prediction(const std::string& text);

struct AttackScore {
    double ac = 0.0;  // percent correct over all bits
    double pc = 0.0;  // percent correct-or-undeciphered (optimistic)
    double kpa = 0.0; // percent correct over deciphered bits
    bool kpa_defined = false; // false when every bit is X
    int k_correct = 0;
    int k_x = 0;
    int k_total = 0;

    std::string to_json() const;
};

AttackScore score(const Prediction& pred, const std::vector<uint8_t>& true_key);

/// Uniform i.i.d. 0/1 guess, no X bits.
Prediction random_guess(int key_length, uint64_t seed);

/// Locked-gate counts keyed by type name; the attacker's prior over which
/// member of a complement pair tends to be the original.
struct PairCensus {
    std::map<std::string, long> counts;

    void add(const std::string& type, long k = 1) { counts[type] += k; }
    long count(const std::string& type) const {
        auto it = counts.find(type);
        return it == counts.end() ? 0 : it->second;
    }
};

/// Ground-truth census of the original types behind a resolved plan's
/// combinational picks, for building cross-corpus priors in experiments
/// (the analogue of training a model on designs with known keys).
PairCensus census_plan_originals(const Netlist& original, const CellLibrary& lib,
                                 const LockingPlan& plan);

/**
 * Structural majority-type attack on the gate-level key structures.
 * Locates each key bit's structure from the public key-distribution nets,
 * reads off the visible parameters (present gate type, mux input order or
 * keygate polarity), and guesses the hidden transform bit by assuming the
 * census-majority member of the complement pair is the original. Ties and
 * FF locking structures yield X.
 *
 * The one-argument form censuses the present types of the locked netlist
 * itself; the census overload scores against an external prior (e.g. pooled
 * ground truth of other locked designs). Throws when no key structure is
 * found at all.
 */
Prediction imbalance_attack(const Netlist& locked, const CellLibrary& lib);
Prediction imbalance_attack(const Netlist& locked, const CellLibrary& lib,
                            const PairCensus& census);

} // namespace tromux
