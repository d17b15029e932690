#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace litmine {

/// Fixed-universe bitset used as the working set during filter evaluation.
class DenseBitset {
public:
    DenseBitset() = default;
    explicit DenseBitset(std::size_t size, bool value = false);

    std::size_t size() const noexcept { return size_; }
    std::size_t count() const noexcept;
    bool empty() const noexcept { return count() == 0; }

    bool test(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i) noexcept { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
    void reset(std::size_t i) noexcept { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
    void set_all() noexcept;
    void reset_all() noexcept;

    /// Complement within [0, size).
    void flip() noexcept;

    DenseBitset& operator|=(const DenseBitset& other);
    DenseBitset& operator&=(const DenseBitset& other);

    std::span<std::uint64_t> words() noexcept { return words_; }
    std::span<const std::uint64_t> words() const noexcept { return words_; }

    std::vector<std::uint32_t> to_vector() const;

    template<class Fn>
    void for_each(Fn&& fn) const
    {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits != 0) {
                fn(static_cast<std::uint32_t>(w * 64 + static_cast<std::size_t>(std::countr_zero(bits))));
                bits &= bits - 1;
            }
        }
    }

    friend bool operator==(const DenseBitset&, const DenseBitset&) = default;

private:
    void clear_tail() noexcept;

    std::size_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Compressed sorted set of 32-bit ordinals. Values are split by their high
/// 16 bits into blocks; each block is a sorted uint16 array when sparse and a
/// 65536-bit bitmap when dense.
class Postings {
public:
    Postings() = default;

    /// `values` must be strictly increasing.
    static Postings from_sorted(std::span<const std::uint32_t> values);
    static Postings from_unsorted(std::vector<std::uint32_t> values);

    std::size_t size() const noexcept { return size_; }
    bool empty() const noexcept { return size_ == 0; }
    bool contains(std::uint32_t value) const;
    std::vector<std::uint32_t> to_vector() const;

    /// Sets every member whose value is below `out.size()`.
    void or_into(DenseBitset& out) const;
    DenseBitset to_bitset(std::size_t universe) const;

    std::size_t block_count() const noexcept { return blocks_.size(); }
    std::size_t bitmap_block_count() const noexcept;
    std::size_t memory_bytes() const noexcept;

    friend bool operator==(const Postings&, const Postings&) = default;

    /// Blocks switch from array to bitmap above this cardinality.
    static constexpr std::size_t kArrayLimit = 4096;

private:
    struct Block {
        std::uint16_t key = 0;
        std::uint32_t cardinality = 0;
        std::vector<std::uint16_t> array;
        std::vector<std::uint64_t> bitmap;

        bool is_bitmap() const noexcept { return !bitmap.empty(); }
        friend bool operator==(const Block&, const Block&) = default;
    };

    std::size_t size_ = 0;
    std::vector<Block> blocks_;
};

} // namespace litmine
