#include "litmine/postings.hpp"

#include <algorithm>
#include <stdexcept>

namespace litmine {

DenseBitset::DenseBitset(std::size_t size, bool value)
    : size_(size), words_((size + 63) / 64, value ? ~std::uint64_t{0} : 0)
{
    clear_tail();
}

std::size_t DenseBitset::count() const noexcept
{
    std::size_t n = 0;
    for (auto w : words_) {
        n += static_cast<std::size_t>(std::popcount(w));
    }
    return n;
}

void DenseBitset::set_all() noexcept
{
    std::fill(words_.begin(), words_.end(), ~std::uint64_t{0});
    clear_tail();
}

void DenseBitset::reset_all() noexcept { std::fill(words_.begin(), words_.end(), 0); }

void DenseBitset::flip() noexcept
{
    for (auto& w : words_) {
        w = ~w;
    }
    clear_tail();
}

DenseBitset& DenseBitset::operator|=(const DenseBitset& other)
{
    if (other.size_ != size_) {
        throw std::invalid_argument("DenseBitset size mismatch");
    }
    for (std::size_t i = 0; i < words_.size(); ++i) {
        words_[i] |= other.words_[i];
    }
    return *this;
}

DenseBitset& DenseBitset::operator&=(const DenseBitset& other)
{
    if (other.size_ != size_) {
        throw std::invalid_argument("DenseBitset size mismatch");
    }
    for (std::size_t i = 0; i < words_.size(); ++i) {
        words_[i] &= other.words_[i];
    }
    return *this;
}

std::vector<std::uint32_t> DenseBitset::to_vector() const
{
    std::vector<std::uint32_t> out;
    out.reserve(count());
    for_each([&](std::uint32_t v) { out.push_back(v); });
    return out;
}

void DenseBitset::clear_tail() noexcept
{
    if (auto rem = size_ % 64; rem != 0 && !words_.empty()) {
        words_.back() &= (std::uint64_t{1} << rem) - 1;
    }
}

Postings Postings::from_sorted(std::span<const std::uint32_t> values)
{
    Postings p;
    p.size_ = values.size();
    std::size_t i = 0;
    while (i < values.size()) {
        if (i > 0 && values[i] <= values[i - 1]) {
            throw std::invalid_argument("Postings::from_sorted requires strictly increasing input");
        }
        Block block;
        block.key = static_cast<std::uint16_t>(values[i] >> 16);
        std::size_t j = i;
        while (j < values.size() && (values[j] >> 16) == block.key) {
            if (j > i && values[j] <= values[j - 1]) {
                throw std::invalid_argument("Postings::from_sorted requires strictly increasing input");
            }
            ++j;
        }
        block.cardinality = static_cast<std::uint32_t>(j - i);
        if (block.cardinality > kArrayLimit) {
            block.bitmap.assign(1024, 0);
            for (std::size_t k = i; k < j; ++k) {
                auto low = values[k] & 0xffffu;
                block.bitmap[low >> 6] |= std::uint64_t{1} << (low & 63);
            }
        } else {
            block.array.reserve(block.cardinality);
            for (std::size_t k = i; k < j; ++k) {
                block.array.push_back(static_cast<std::uint16_t>(values[k] & 0xffffu));
            }
        }
        p.blocks_.push_back(std::move(block));
        i = j;
    }
    return p;
}

Postings Postings::from_unsorted(std::vector<std::uint32_t> values)
{
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return from_sorted(values);
}

bool Postings::contains(std::uint32_t value) const
{
    auto key = static_cast<std::uint16_t>(value >> 16);
    auto it = std::lower_bound(blocks_.begin(), blocks_.end(), key,
                               [](const Block& b, std::uint16_t k) { return b.key < k; });
    if (it == blocks_.end() || it->key != key) {
        return false;
    }
    auto low = static_cast<std::uint16_t>(value & 0xffffu);
    if (it->is_bitmap()) {
        return (it->bitmap[low >> 6] >> (low & 63)) & 1u;
    }
    return std::binary_search(it->array.begin(), it->array.end(), low);
}

std::vector<std::uint32_t> Postings::to_vector() const
{
    std::vector<std::uint32_t> out;
    out.reserve(size_);
    for (const auto& b : blocks_) {
        const std::uint32_t high = std::uint32_t{b.key} << 16;
        if (b.is_bitmap()) {
            for (std::size_t w = 0; w < b.bitmap.size(); ++w) {
                std::uint64_t bits = b.bitmap[w];
                while (bits != 0) {
                    out.push_back(high | static_cast<std::uint32_t>(w * 64 + std::countr_zero(bits)));
                    bits &= bits - 1;
                }
            }
        } else {
            for (auto low : b.array) {
                out.push_back(high | low);
            }
        }
    }
    return out;
}

void Postings::or_into(DenseBitset& out) const
{
    auto words = out.words();
    const std::size_t universe = out.size();
    for (const auto& b : blocks_) {
        const std::size_t base = std::size_t{b.key} << 16;
        if (base >= universe) {
            break;
        }
        if (b.is_bitmap()) {
            // base is a multiple of 64, so block words line up with output words.
            const std::size_t first_word = base >> 6;
            const std::size_t n = std::min<std::size_t>(b.bitmap.size(), words.size() - first_word);
            for (std::size_t w = 0; w < n; ++w) {
                words[first_word + w] |= b.bitmap[w];
            }
        } else {
            for (auto low : b.array) {
                const std::size_t v = base | low;
                if (v >= universe) {
                    break;
                }
                words[v >> 6] |= std::uint64_t{1} << (v & 63);
            }
        }
    }
    if (auto rem = universe % 64; rem != 0 && !words.empty()) {
        words.back() &= (std::uint64_t{1} << rem) - 1;
    }
}

DenseBitset Postings::to_bitset(std::size_t universe) const
{
    DenseBitset out(universe);
    or_into(out);
    return out;
}

std::size_t Postings::bitmap_block_count() const noexcept
{
    return static_cast<std::size_t>(
        std::count_if(blocks_.begin(), blocks_.end(), [](const Block& b) { return b.is_bitmap(); }));
}

std::size_t Postings::memory_bytes() const noexcept
{
    std::size_t bytes = sizeof(*this) + blocks_.size() * sizeof(Block);
    for (const auto& b : blocks_) {
        bytes += b.array.size() * sizeof(std::uint16_t) + b.bitmap.size() * sizeof(std::uint64_t);
    }
    return bytes;
}

} // namespace litmine
