#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ncfountain/random.hpp"

namespace ncfountain {

/// Fixed-length GF(2) vector packed 64 bits per word. Bits past size() in the
/// last word are kept zero.
class BitVector {
 public:
  using word_type = std::uint64_t;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  static constexpr std::size_t word_bits = 64;

  BitVector() = default;
  explicit BitVector(std::size_t nbits) : nbits_(nbits), words_(word_count_for(nbits), 0) {}

  static BitVector unit(std::size_t nbits, std::size_t k) {
    BitVector v(nbits);
    v.set(k);
    return v;
  }

  /// Independent fair bits.
  static BitVector random(std::size_t nbits, Rng& rng) {
    BitVector v(nbits);
    for (auto& w : v.words_) w = rng();
    v.clear_tail();
    return v;
  }

  static constexpr std::size_t word_count_for(std::size_t nbits) {
    return (nbits + word_bits - 1) / word_bits;
  }

  std::size_t size() const noexcept { return nbits_; }
  std::size_t word_count() const noexcept { return words_.size(); }
  std::span<const word_type> words() const noexcept { return words_; }

  bool test(std::size_t i) const {
    check_index(i);
    return (words_[i / word_bits] >> (i % word_bits)) & 1U;
  }

  void set(std::size_t i, bool value = true) {
    check_index(i);
    const word_type mask = word_type{1} << (i % word_bits);
    if (value)
      words_[i / word_bits] |= mask;
    else
      words_[i / word_bits] &= ~mask;
  }

  void flip(std::size_t i) {
    check_index(i);
    words_[i / word_bits] ^= word_type{1} << (i % word_bits);
  }

  bool none() const noexcept {
    return std::all_of(words_.begin(), words_.end(), [](word_type w) { return w == 0; });
  }

  std::size_t popcount() const noexcept {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  /// Index of the first set bit at or after `from`, or npos.
  std::size_t find_next(std::size_t from) const noexcept {
    if (from >= nbits_) return npos;
    std::size_t w = from / word_bits;
    word_type word = words_[w] & (~word_type{0} << (from % word_bits));
    while (true) {
      if (word != 0) return w * word_bits + static_cast<std::size_t>(std::countr_zero(word));
      if (++w == words_.size()) return npos;
      word = words_[w];
    }
  }

  std::size_t find_first() const noexcept { return find_next(0); }

  BitVector& operator^=(const BitVector& other) {
    require_same_size(other);
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= other.words_[w];
    return *this;
  }

  /// XOR restricted to words [first_word, end); the caller guarantees the
  /// other operand is zero below that word.
  void xor_tail(const BitVector& other, std::size_t first_word) noexcept {
    for (std::size_t w = first_word; w < words_.size(); ++w) words_[w] ^= other.words_[w];
  }

  friend BitVector operator^(BitVector a, const BitVector& b) {
    a ^= b;
    return a;
  }

  friend bool operator==(const BitVector&, const BitVector&) = default;

  std::string to_string() const {
    std::string s(nbits_, '0');
    for (std::size_t i = 0; i < nbits_; ++i)
      if (test(i)) s[i] = '1';
    return s;
  }

 private:
  void check_index(std::size_t i) const {
    if (i >= nbits_) throw std::out_of_range("BitVector index " + std::to_string(i));
  }

  void require_same_size(const BitVector& other) const {
    if (other.nbits_ != nbits_)
      throw std::invalid_argument("BitVector length mismatch: " + std::to_string(nbits_) +
                                  " vs " + std::to_string(other.nbits_));
  }

  void clear_tail() noexcept {
    const std::size_t rem = nbits_ % word_bits;
    if (rem != 0 && !words_.empty()) words_.back() &= (word_type{1} << rem) - 1;
  }

  std::size_t nbits_ = 0;
  std::vector<word_type> words_;
};

}  // namespace ncfountain
