#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace tromux {

/**
 * One library cell type. Combinational cells have a single output whose function
 * is stored as a truth table over the declared input order (bit i of `truth` is
 * the output for input valuation i, input pin 0 = least significant bit).
 * Sequential cells are edge-triggered D flip-flops; an output pin named QN is
 * the inverted state, and an input pin named EN makes the capture conditional
 * (load-enable FF).
 */
struct CellType {
    std::string name;
    int width = 1; // placement sites occupied
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    bool sequential = false;
    uint64_t truth = 0;                                     // combinational only
    std::vector<bool> output_inverted;                       // per output, FF only
    bool has_enable = false;                                 // FF with EN pin
    std::string complement;                                  // empty when none
    std::vector<std::pair<std::pair<std::string, std::string>, double>> delays; // (in,out)->delay

    bool is_input(const std::string& pin) const;
    bool is_output(const std::string& pin) const;
    double arc_delay(const std::string& in, const std::string& out) const; // -1 when absent
    double worst_arc() const;
    /// Evaluate the combinational function; `vals` follows the input pin order.
    bool eval(const std::vector<uint8_t>& vals) const;
};

class CellLibrary {
public:
    const CellType* find(const std::string& name) const;
    const CellType& at(const std::string& name) const; // throws ValidationError
    const std::vector<CellType>& types() const { return types_; }
    bool has(const std::string& name) const { return find(name) != nullptr; }

    /// Complement partner name, or "" when the type has none.
    std::string complement_of(const std::string& name) const;

    /// Added delay bound per locked instance: worst INV arc + worst MUX2 arc for
    /// the mux variant, worst XOR2 arc for the xor variant.
    double sigma_mux() const { return sigma_mux_; }
    double sigma_xor() const { return sigma_xor_; }

    int smallest_ff_width() const;

    /// Parse the library text format, check structural sanity and semantic
    /// invariants (complement symmetry, pointwise-negation, mandatory cells),
    /// and derive the sigma values. Throws ValidationError.
    static CellLibrary parse(const std::string& text);
    static CellLibrary load(const std::string& path);

    /// Built-in reference library (same content as data/default.lib).
    static const CellLibrary& default_library();
    static const char* default_library_text();

    std::string to_text() const;

private:
    void add(CellType t);
    void validate_semantics();

    std::vector<CellType> types_;
    std::unordered_map<std::string, int> index_;
    double sigma_mux_ = 0.0;
    double sigma_xor_ = 0.0;
};

} // namespace tromux
