#pragma once

#include <cstdint>
#include <optional>

#include "pollchain/common/bytes.hpp"

namespace pollchain {

/// Big-endian writer for the wire formats.
class ByteWriter {
public:
    ByteWriter() = default;

    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void raw(ByteView data) { buf_.insert(buf_.end(), data.begin(), data.end()); }

    /// 2-byte big-endian length followed by the payload. Caller guarantees size <= 0xFFFF.
    void array_with_size(ByteView data);

    /// Presence flag (1 byte) followed by the 32-byte id when present.
    void optional_id(const std::optional<Hash256>& id);

    const Bytes& bytes() const& { return buf_; }
    Bytes&& take() && { return std::move(buf_); }

private:
    Bytes buf_;
};

/// Bounds-checked big-endian reader. Any out-of-range read or malformed
/// field latches failed(); subsequent reads return zeros.
class ByteReader {
public:
    explicit ByteReader(ByteView data) : data_(data) {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    Bytes raw(std::size_t n);

    template <std::size_t N>
    std::array<std::uint8_t, N> fixed() {
        std::array<std::uint8_t, N> out{};
        if (!need(N)) return out;
        std::copy_n(data_.begin() + pos_, N, out.begin());
        pos_ += N;
        return out;
    }

    Bytes array_with_size();
    std::optional<Hash256> optional_id();

    void mark_failed() { failed_ = true; }
    bool failed() const { return failed_; }
    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return failed_ ? 0 : data_.size() - pos_; }
    bool at_end() const { return !failed_ && pos_ == data_.size(); }

private:
    bool need(std::size_t n);

    ByteView data_;
    std::size_t pos_ = 0;
    bool failed_ = false;
};

}  // namespace pollchain
