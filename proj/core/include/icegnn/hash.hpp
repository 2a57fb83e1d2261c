#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace icegnn {

/// 64-bit FNV-1a. Every step is a bijection of the state, so changing any
/// single byte of the input always changes the result.
class Fnv1a {
public:
    void update(std::span<const std::uint8_t> bytes) noexcept {
        for (auto b : bytes) {
            state_ ^= b;
            state_ *= 0x100000001b3ULL;
        }
    }
    void update(std::string_view s) noexcept {
        update({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
    }
    void update_u64(std::uint64_t v) noexcept {
        std::uint8_t b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
        update(b);
    }
    std::uint64_t digest() const noexcept { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string to_hex(std::uint64_t v);

} // namespace icegnn
