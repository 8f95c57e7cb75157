#include <set>
#include <random>
#include <sstream>

#include "doctest.h"
#include "techgap/error.hpp"
#include "techgap/ingest.hpp"
#include "techgap/posting_list.hpp"
#include "techgap/text.hpp"

using namespace techgap;

TEST_CASE("text helpers") {
  CHECK(normalize_term("  Phased   ARRAY\t") == "phased array");
  CHECK(normalize_term("STRASSE") == normalize_term("straße"));
  CHECK(parse_date("2020-02-29").has_value());
  CHECK_FALSE(parse_date("2021-02-29").has_value());
  CHECK_FALSE(parse_date("2021-2-1").has_value());
  CHECK(format_date(make_date(2019, 3, 7)) == "2019-03-07");
  CHECK(year_of(make_date(2019, 12, 31)) == 2019);
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(split_list(" a, ,b ,c") == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("posting lists: frozen encoding") {
  const std::vector<std::uint32_t> ids{3, 4, 200, 70000};
  const PostingList list = PostingList::encode(ids);
  // gaps 3, 1, 196, 69800 → 1 + 1 + 2 + 3 bytes of LEB128
  CHECK(list.bytes().size() == 7);
  CHECK(list.bytes()[0] == 3);
  CHECK(list.bytes()[2] == 0xC4);
  CHECK(list.decode() == ids);
  CHECK_THROWS_AS(PostingList::encode(std::vector<std::uint32_t>{5, 5}), Error);
  CHECK(PostingList::encode({}).empty());
}

TEST_CASE("property: posting list round trip, cursor and union") {
  std::mt19937_64 rng(12);
  std::vector<PostingList> lists;
  std::set<std::uint32_t> all;
  for (int i = 0; i < 30; ++i) {
    std::set<std::uint32_t> ids;
    const std::size_t n = rng() % 200;
    while (ids.size() < n) ids.insert(static_cast<std::uint32_t>(rng() % 1'000'000));
    const std::vector<std::uint32_t> v(ids.begin(), ids.end());
    PostingList list = PostingList::encode(v);
    REQUIRE(list.decode() == v);
    PostingList::Cursor cursor(list);
    std::vector<std::uint32_t> walked;
    for (std::uint32_t x; cursor.next(x);) walked.push_back(x);
    REQUIRE(walked == v);
    all.insert(v.begin(), v.end());
    lists.push_back(std::move(list));
  }
  std::vector<const PostingList*> ptrs;
  for (const auto& l : lists) ptrs.push_back(&l);
  CHECK(union_postings(ptrs) == std::vector<std::uint32_t>(all.begin(), all.end()));
}

TEST_CASE("source parsing collects rejections per line") {
  std::istringstream in(
      R"({"patent_id":"P1","title":"t","grant_date":"2019-01-02","assignees":["Acme"],"terms":["radar"]})"
      "\n"
      "not json\n"
      "\n"
      R"({"patent_id":"P2","title":"t","grant_date":"2019-13-02","assignees":["Acme"],"terms":["radar"]})"
      "\n"
      R"({"patent_id":"P3","title":"t","grant_date":"2019-01-02","assignees":["Acme"],"terms":["radar"],"v":9})"
      "\n");
  const LoadedBatch batch = parse_source(SourceKind::Patents, in);
  CHECK(batch.records.patents.size() == 1);
  REQUIRE(batch.rejected.size() == 3);
  CHECK(batch.rejected[0].line == 2);
  CHECK(batch.rejected[0].code == ErrorCode::ParseError);
  CHECK(batch.rejected[1].line == 4);
  CHECK(batch.rejected[1].code == ErrorCode::SchemaViolation);
  CHECK(batch.rejected[1].field == "grant_date");
  CHECK(batch.rejected[2].field == "v");
}

TEST_CASE("partnership and funding validation") {
  std::istringstream p(R"({"org_a":"Acme","org_b":" ACME ","since_date":"2019-01-01"})" "\n");
  CHECK(parse_source(SourceKind::Partnerships, p).rejected.at(0).field == "org_b");
  std::istringstream f(R"({"award_id":"A","recipient":"Acme","amount":-1,"start_date":"2019-01-01","terms":[]})" "\n");
  CHECK(parse_source(SourceKind::Funding, f).rejected.at(0).field == "amount");
  CHECK_THROWS_AS(load_source(SourceKind::News, "/nonexistent/news.jsonl"), Error);
}

TEST_CASE("write_source and parse_source round trip") {
  SourceBundle b;
  b.patents.push_back({"P1", "Radar unit", make_date(2018, 5, 1), {"Acme", "Birch"}, {"radar", "antenna"}, "abs",
                       {{"Acme", "Birch", make_date(2019, 1, 1)}}});
  b.news.push_back({"n1", make_date(2018, 6, 1), DocumentKind::Publication, "Acme uses radar",
                    {{"Acme", MentionKind::Organization, 0, 4}, {"radar", MentionKind::Technology, 10, 5}}});
  b.funding.push_back({"A1", "Acme", 1000.0, make_date(2018, 7, 1), {"radar"}});
  b.partnerships.push_back({"Acme", "Birch", "alliance", make_date(2017, 1, 1)});
  for (SourceKind kind : kAllSourceKinds) {
    std::stringstream io;
    write_source(kind, b, io);
    const LoadedBatch back = parse_source(kind, io);
    CHECK(back.rejected.empty());
    switch (kind) {
      case SourceKind::Patents: CHECK(back.records.patents == b.patents); break;
      case SourceKind::News: CHECK(back.records.news == b.news); break;
      case SourceKind::Funding: CHECK(back.records.funding == b.funding); break;
      case SourceKind::Partnerships: CHECK(back.records.partnerships == b.partnerships); break;
    }
  }
}

TEST_CASE("canonicalize: later record with the same id wins") {
  SourceBundle b;
  b.funding.push_back({"A2", "Acme", 1.0, make_date(2018, 1, 1), {}});
  b.funding.push_back({"A1", "Acme", 2.0, make_date(2018, 1, 1), {}});
  b.funding.push_back({"A2", "Acme", 3.0, make_date(2018, 1, 1), {}});
  b.partnerships.push_back({"A", "B", "x", make_date(2018, 1, 1)});
  b.partnerships.push_back({"A", "B", "x", make_date(2018, 1, 1)});
  b.canonicalize();
  REQUIRE(b.funding.size() == 2);
  CHECK(b.funding[0].award_id == "A1");
  CHECK(b.funding[1].amount == 3.0);
  CHECK(b.partnerships.size() == 1);
  CHECK(b.record_count() == 3);
}

TEST_CASE("derived relationships: frozen edge set") {
  SourceBundle b;
  b.patents.push_back({"P1", "t", make_date(2018, 5, 1), {"Acme", "Birch"}, {"Radar", "antenna"}, "", {}});
  b.funding.push_back({"A1", "Acme", 10.0, make_date(2019, 1, 1), {"radar", "sonar"}});
  b.partnerships.push_back({"Birch", "Acme", "alliance", make_date(2017, 1, 1)});
  const auto edges = derive_relationships(b);
  std::multiset<std::tuple<std::string, std::string, std::string>> got;
  for (const auto& e : edges) got.insert({std::string(to_string(e.kind)), e.src, e.dst});
  const std::multiset<std::tuple<std::string, std::string, std::string>> want{
      {"coOwnership", "org:acme", "org:birch"},
      {"worksOn", "org:acme", "tech:antenna"},
      {"worksOn", "org:acme", "tech:radar"},
      {"worksOn", "org:birch", "tech:antenna"},
      {"worksOn", "org:birch", "tech:radar"},
      {"coOccurrence", "tech:antenna", "tech:radar"},
      {"worksOn", "org:acme", "tech:radar"},
      {"worksOn", "org:acme", "tech:sonar"},
      {"coOccurrence", "tech:radar", "tech:sonar"},
      {"partnership", "org:acme", "org:birch"},
  };
  CHECK(got == want);
  CHECK(std::is_sorted(edges.begin(), edges.end()));

  DeriveOptions strict;
  strict.min_cooccurrence = 2;
  for (const auto& e : derive_relationships(b, strict)) CHECK(e.kind != EdgeKind::CoOccurrence);
}
