#include "pollchain/crypto/base58.hpp"

#include <algorithm>
#include <array>

namespace pollchain::crypto {

namespace {

constexpr std::string_view kAlphabet = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";

constexpr std::array<int, 128> make_index() {
    std::array<int, 128> idx{};
    for (auto& v : idx) v = -1;
    for (std::size_t i = 0; i < kAlphabet.size(); ++i) idx[static_cast<unsigned char>(kAlphabet[i])] = static_cast<int>(i);
    return idx;
}

constexpr auto kIndex = make_index();

}  // namespace

std::string base58_encode(ByteView data) {
    std::size_t zeros = 0;
    while (zeros < data.size() && data[zeros] == 0) ++zeros;

    // log(256) / log(58) ~ 1.37
    std::vector<std::uint8_t> digits(data.size() * 138 / 100 + 1, 0);
    std::size_t used = 0;
    for (std::size_t i = zeros; i < data.size(); ++i) {
        int carry = data[i];
        std::size_t j = 0;
        for (auto it = digits.rbegin(); (carry != 0 || j < used) && it != digits.rend(); ++it, ++j) {
            carry += 256 * (*it);
            *it = static_cast<std::uint8_t>(carry % 58);
            carry /= 58;
        }
        used = j;
    }
    auto it = std::find_if(digits.begin(), digits.end(), [](std::uint8_t d) { return d != 0; });

    std::string out(zeros, '1');
    for (; it != digits.end(); ++it) out.push_back(kAlphabet[*it]);
    return out;
}

std::optional<Bytes> base58_decode(std::string_view text) {
    std::size_t ones = 0;
    while (ones < text.size() && text[ones] == '1') ++ones;

    // log(58) / log(256) ~ 0.733
    std::vector<std::uint8_t> b256(text.size() * 733 / 1000 + 1, 0);
    std::size_t used = 0;
    for (std::size_t i = ones; i < text.size(); ++i) {
        auto c = static_cast<unsigned char>(text[i]);
        if (c >= 128 || kIndex[c] < 0) return std::nullopt;
        int carry = kIndex[c];
        std::size_t j = 0;
        for (auto it = b256.rbegin(); (carry != 0 || j < used) && it != b256.rend(); ++it, ++j) {
            carry += 58 * (*it);
            *it = static_cast<std::uint8_t>(carry % 256);
            carry /= 256;
        }
        used = j;
    }
    auto it = std::find_if(b256.begin(), b256.end(), [](std::uint8_t d) { return d != 0; });

    Bytes out(ones, 0);
    out.insert(out.end(), it, b256.end());
    return out;
}

}  // namespace pollchain::crypto
