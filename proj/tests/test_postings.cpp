#include <set>

#include <catch_amalgamated.hpp>

#include "litmine/postings.hpp"
#include "litmine/rng.hpp"

using namespace litmine;

TEST_CASE("postings round-trip sparse and dense blocks")
{
    Rng rng(3);
    for (int trial = 0; trial < 40; ++trial) {
        std::set<std::uint32_t> ref;
        const auto n = rng.below(20000);
        const auto span = 1 + rng.below(300000);
        for (std::uint64_t i = 0; i < n; ++i) {
            ref.insert(static_cast<std::uint32_t>(rng.below(span)));
        }
        std::vector<std::uint32_t> values(ref.begin(), ref.end());
        auto p = Postings::from_sorted(values);
        CHECK(p.size() == values.size());
        CHECK(p.to_vector() == values);
        for (int probe = 0; probe < 200; ++probe) {
            auto x = static_cast<std::uint32_t>(rng.below(span + 10));
            CHECK(p.contains(x) == (ref.count(x) > 0));
        }
        auto bits = p.to_bitset(span);
        CHECK(bits.count() == values.size());
        CHECK(bits.to_vector() == values);
    }
}

TEST_CASE("dense blocks switch to bitmaps")
{
    std::vector<std::uint32_t> dense(10000);
    for (std::uint32_t i = 0; i < dense.size(); ++i) {
        dense[i] = i;
    }
    auto p = Postings::from_sorted(dense);
    CHECK(p.block_count() == 1);
    CHECK(p.bitmap_block_count() == 1);
    std::vector<std::uint32_t> sparse{1, 70000, 140000};
    auto q = Postings::from_sorted(sparse);
    CHECK(q.block_count() == 3);
    CHECK(q.bitmap_block_count() == 0);
}

TEST_CASE("from_unsorted deduplicates and from_sorted rejects disorder")
{
    auto p = Postings::from_unsorted({5, 1, 5, 3});
    CHECK(p.to_vector() == std::vector<std::uint32_t>{1, 3, 5});
    std::vector<std::uint32_t> bad{3, 1};
    CHECK_THROWS(Postings::from_sorted(bad));
}

TEST_CASE("or_into ignores members past the bitset size")
{
    auto p = Postings::from_unsorted({1, 10, 100});
    DenseBitset b(50);
    p.or_into(b);
    CHECK(b.to_vector() == std::vector<std::uint32_t>{1, 10});
}

TEST_CASE("bitset complement stays inside the universe")
{
    DenseBitset b(70);
    b.set(3);
    b.flip();
    CHECK(b.count() == 69);
    CHECK_FALSE(b.test(3));
    b.set_all();
    CHECK(b.count() == 70);
    DenseBitset c(70);
    c.set(5);
    b &= c;
    CHECK(b.to_vector() == std::vector<std::uint32_t>{5});
}
