#include "pollchain/common/codec.hpp"

#include <algorithm>

namespace pollchain {

void ByteWriter::u16(std::uint16_t v) {
    buf_.push_back(static_cast<std::uint8_t>(v >> 8));
    buf_.push_back(static_cast<std::uint8_t>(v));
}

void ByteWriter::u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::u64(std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::array_with_size(ByteView data) {
    u16(static_cast<std::uint16_t>(data.size()));
    raw(data);
}

void ByteWriter::optional_id(const std::optional<Hash256>& id) {
    if (id) {
        u8(1);
        raw(*id);
    } else {
        u8(0);
    }
}

bool ByteReader::need(std::size_t n) {
    if (failed_ || data_.size() - pos_ < n) {
        failed_ = true;
        return false;
    }
    return true;
}

std::uint8_t ByteReader::u8() {
    if (!need(1)) return 0;
    return data_[pos_++];
}

std::uint16_t ByteReader::u16() {
    if (!need(2)) return 0;
    std::uint16_t v = static_cast<std::uint16_t>((data_[pos_] << 8) | data_[pos_ + 1]);
    pos_ += 2;
    return v;
}

std::uint32_t ByteReader::u32() {
    if (!need(4)) return 0;
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_ + i];
    pos_ += 4;
    return v;
}

std::uint64_t ByteReader::u64() {
    if (!need(8)) return 0;
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | data_[pos_ + i];
    pos_ += 8;
    return v;
}

Bytes ByteReader::raw(std::size_t n) {
    if (!need(n)) return {};
    Bytes out(data_.begin() + pos_, data_.begin() + pos_ + n);
    pos_ += n;
    return out;
}

Bytes ByteReader::array_with_size() {
    auto n = u16();
    return raw(n);
}

std::optional<Hash256> ByteReader::optional_id() {
    auto flag = u8();
    if (failed_) return std::nullopt;
    if (flag == 0) return std::nullopt;
    if (flag != 1) {
        failed_ = true;
        return std::nullopt;
    }
    return fixed<32>();
}

}  // namespace pollchain
