#pragma once

#include <optional>
#include <string>

#include "hord/forms.hpp"

namespace hord::io {

// Text format, one coefficient per line:
//   #form label=<text> weight=<int> level=<int> nmax=<int>
//   <n>\t<a_n>
// with n strictly increasing from 1, no gaps.
void write_text(const forms::CoefficientTable& table, const std::string& path);
forms::CoefficientTable read_text(const std::string& path);

// Reads, then verifies the normalization / multiplicativity / recurrence /
// Deligne invariants; throws InvariantViolation naming the first witnesses.
// `expect` cross-checks the declared descriptor when provided.
forms::CoefficientTable ingest_table(const std::string& path,
                                     const std::optional<forms::FormDescriptor>& expect = {});

// Binary cache: magic "HORD1", little-endian header (weight u32, level u32,
// n_max u64), length-prefixed sign-byte-first big integers, trailing FNV-1a
// checksum. Throws CacheError on any corruption.
void write_cache(const forms::CoefficientTable& table, const std::string& path);
forms::CoefficientTable read_cache(const std::string& path);

// Cache lookup under dir, keyed by (label, weight, level). Returns the
// cached prefix when the stored table is long enough; otherwise std::nullopt.
std::optional<forms::CoefficientTable> load_cached(const std::string& dir,
                                                   const std::string& label, unsigned weight,
                                                   unsigned level, uint64_t n_max);
void store_cached(const std::string& dir, const forms::CoefficientTable& table);

std::string cache_path(const std::string& dir, const std::string& label, unsigned weight,
                       unsigned level);

}  // namespace hord::io
