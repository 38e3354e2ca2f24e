/*
==================================================================================
   Copyright (c) 2026 The pcl-slicing Authors.

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
==================================================================================
*/
#pragma once

#include <array>
#include <charconv>
#include <compare>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <system_error>

#include "pcl/error.hpp"

namespace pcl {

enum class Qci : std::uint8_t { QCI1 = 1, QCI2 = 2, QCI5 = 5, QCI9 = 9 };

inline constexpr std::array<Qci, 4> kAllQcis{Qci::QCI1, Qci::QCI2, Qci::QCI5, Qci::QCI9};

inline constexpr int qci_number(Qci q) noexcept { return static_cast<int>(q); }

// Position of a QCI in kAllQcis; sample rows are ordered by this index.
inline constexpr std::size_t qci_index(Qci q) noexcept {
    switch (q) {
        case Qci::QCI1: return 0;
        case Qci::QCI2: return 1;
        case Qci::QCI5: return 2;
        case Qci::QCI9: return 3;
    }
    return 0;
}

inline std::optional<Qci> qci_from_number(long n) noexcept {
    switch (n) {
        case 1: return Qci::QCI1;
        case 2: return Qci::QCI2;
        case 5: return Qci::QCI5;
        case 9: return Qci::QCI9;
        default: return std::nullopt;
    }
}

struct BearerClass {
    Qci qci;
    std::string_view service_label;
};

inline constexpr std::array<BearerClass, 4> kBearerClasses{{
    {Qci::QCI1, "conversational voice"},
    {Qci::QCI2, "live video streaming"},
    {Qci::QCI5, "IMS signalling"},
    {Qci::QCI9, "buffered video streaming"},
}};

struct CellId {
    int enb_index = 0;
    int cell_index = 0;

    friend auto operator<=>(const CellId&, const CellId&) = default;
    friend bool operator==(const CellId&, const CellId&) = default;
};

inline std::string to_string(const CellId& c) {
    return "enb" + std::to_string(c.enb_index) + "-cell" + std::to_string(c.cell_index);
}

// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw ContractError("cannot format double");
    return std::string(buf.data(), ptr);
}

inline std::optional<double> parse_double(std::string_view s) noexcept {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<long> parse_long(std::string_view s) noexcept {
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

// 64-bit FNV-1a, rendered as 16 hex digits.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string digest_hex(std::string_view data) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::uint64_t h = fnv1a64(data);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
        h >>= 4;
    }
    return out;
}

// Seeded generator whose output is identical across standard libraries;
// std::uniform_real_distribution is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    std::uint64_t next_u64() { return engine_(); }
    // Integer in [lo, hi].
    long uniform_int(long lo, long hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<long>(engine_() % span);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace pcl
