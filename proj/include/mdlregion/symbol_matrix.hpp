#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace mdlregion {

using Symbol = std::uint8_t;  // symbols are 1..S, S <= 255

/// The discretized dataset: N series of length T over the alphabet {1..S}.
/// Row-major, one row per spatial location. No missing entries; gap filling
/// and discretization happen upstream in the ingestion pipeline.
class SymbolMatrix {
public:
    SymbolMatrix() = default;

    SymbolMatrix(std::size_t n_series, std::size_t series_length, int alphabet_size)
        : n_(n_series), t_(series_length), s_(alphabet_size),
          values_(n_series * series_length, Symbol{1}) {
        if (alphabet_size < 1 || alphabet_size > 255)
            throw std::invalid_argument("SymbolMatrix: alphabet size must be in [1, 255]");
    }

    std::size_t n_series() const { return n_; }
    std::size_t series_length() const { return t_; }
    int alphabet_size() const { return s_; }

    Symbol operator()(std::size_t i, std::size_t t) const { return values_[i * t_ + t]; }
    Symbol& operator()(std::size_t i, std::size_t t) { return values_[i * t_ + t]; }

    std::span<const Symbol> row(std::size_t i) const {
        return {values_.data() + i * t_, t_};
    }
    std::span<Symbol> row(std::size_t i) { return {values_.data() + i * t_, t_}; }

    const std::vector<Symbol>& values() const { return values_; }

    /// Checks every entry lies in {1..S}. Throws on violation.
    void validate() const {
        for (Symbol v : values_)
            if (v < 1 || v > s_)
                throw std::runtime_error("SymbolMatrix: symbol outside {1..S}");
    }

    bool operator==(const SymbolMatrix&) const = default;

private:
    std::size_t n_ = 0;
    std::size_t t_ = 0;
    int s_ = 1;
    std::vector<Symbol> values_;
};

}  // namespace mdlregion
