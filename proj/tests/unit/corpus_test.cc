#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "chronoqa/corpus.h"
#include "chronoqa/error.h"

namespace chronoqa {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("chronoqa_corpus_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

QaItem qa(const std::string& id, const std::string& question) {
  QaItem item;
  item.id = id;
  item.question = question;
  item.gold_answers = {"x"};
  return item;
}

TEST(Corpus, LoadsQaLineWithTrailingYear) {
  const auto r = parse_qa_jsonl(
      R"({"id":"q1","question":"Yoichiro Nambu received which award in 2008?","gold_answers":["Nobel Prize in Physics"],"source":"wikidata"})");
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_TRUE(r.issues.empty());
  const QaItem& item = r.records[0];
  EXPECT_EQ(item.source, Source::kWikidata);
  ASSERT_TRUE(item.year_ref);
  EXPECT_EQ(item.year_ref->year, 2008);
  EXPECT_EQ(item.year_ref->position, YearPosition::kTrailing);
  EXPECT_EQ(item.question.substr(item.year_ref->begin, item.year_ref->end - item.year_ref->begin),
            "2008");
}

TEST(Corpus, EmptyFileIsEmptyDatasetError) {
  const fs::path dir = temp_dir("empty");
  write_text_file(dir / "empty.jsonl", "");
  try {
    load_qa(dir / "empty.jsonl");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kData);
  }
  EXPECT_THROW(parse_claim_jsonl("\n  \n"), Error);
}

TEST(Corpus, MissingFileNamesThePath) {
  try {
    load_events("/definitely/not/here.jsonl");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kData);
    EXPECT_NE(std::string(e.what()).find("/definitely/not/here.jsonl"), std::string::npos);
  }
}

TEST(Corpus, EventFilterRejectsExactlyTheLinesWithYears) {
  const std::string fixture =
      R"({"id":"e1","description":"Archduke Franz Ferdinand was assassinated in Sarajevo","year":1914,"month":6,"day":28}
{"id":"e2","description":"The war that began in 1914 ended","year":1918,"month":11,"day":11}
{"id":"e3","description":"The Titanic sank","year":1912,"month":4,"day":15}
{"id":"e4","description":"A treaty signed in 1783 ended a war","year":1783}
{"id":"e5","description":"A crowd of 1500 people gathered","year":1850}
{"id":"e6","description":"Room 101 was opened","year":1900,"month":1}
{"id":"e7","description":"Events of 1999 were celebrated","year":2000}
{"id":"e8","description":"The number 999 was retired","year":1980}
{"id":"e9","description":"A law from 2100 was imagined","year":1990}
{"id":"e10","description":"The 9999 club was founded","year":1960}
)";
  const auto r = parse_event_jsonl(fixture);
  std::set<std::size_t> rejected;
  for (const auto& issue : r.issues) {
    EXPECT_EQ(issue.reason, "year token in description");
    rejected.insert(issue.line);
  }
  // Lines 2, 4, 5, 7 and 9 hold a four-digit token in [1000, 2100].
  EXPECT_EQ(rejected, (std::set<std::size_t>{2, 4, 5, 7, 9}));
  EXPECT_EQ(r.records.size(), 5u);
}

TEST(Corpus, SchemaViolationReportsLineAndField) {
  const auto r = parse_qa_jsonl(
      R"({"id":"a","question":"Who won in 1999?","gold_answers":["x"],"source":"synthetic"}
{"id":"b","question":"Who won in 1999?","gold_answers":[],"source":"synthetic"}
not json
)");
  EXPECT_EQ(r.records.size(), 1u);
  ASSERT_EQ(r.issues.size(), 2u);
  EXPECT_EQ(r.issues[0].line, 2u);
  EXPECT_EQ(r.issues[0].field, "gold_answers");
  EXPECT_EQ(r.issues[1].line, 3u);
}

TEST(Corpus, InvalidEventDatesAreRejected) {
  const auto r = parse_event_jsonl(
      R"({"id":"a","description":"x","year":1900,"month":2,"day":30}
{"id":"b","description":"x","year":1900,"day":3}
{"id":"c","description":"x","year":1700}
{"id":"d","description":"x","year":1904,"month":2,"day":29}
)");
  EXPECT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.issues.size(), 3u);
}

TEST(Corpus, UnknownRelationFailsIngestion) {
  const auto r = parse_quad_jsonl(
      R"({"id":"t","subject":"A","relation":"likes","object":"B","start_year":2000,"end_year":2001})",
      RelationRegistry::builtin());
  EXPECT_TRUE(r.records.empty());
  ASSERT_EQ(r.issues.size(), 1u);
  EXPECT_EQ(r.issues[0].field, "relation");
}

TEST(Corpus, FilterYearEnding) {
  auto kept = filter_year_ending({qa("a", "Who won the cup in 1999?")});
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].year_ref->year, 1999);
  EXPECT_EQ(kept[0].year_ref->position, YearPosition::kTrailing);
  EXPECT_TRUE(filter_year_ending({qa("b", "Who won the 1999 cup final?")}).empty());
}

TEST(Corpus, FilterYearEndingOnMixedFixture) {
  const std::vector<std::pair<std::string, bool>> fixture{
      {"Who won the cup in 1999?", true},
      {"Who won the 1999 cup final?", false},
      {"Which team won the league in 2004 ?", true},
      {"What happened in 2010", false},
      {"In 2006, who was president?", false},
      {"Who led the party in the year 1987?", true},
      {"Who was king 20 years ago?", false},
      {"Who won in 999?", false},
      {"Who won in 3000?", false},
      {"Who won the final in 2015?\"", true},
      {"Where was the summit held?", false},
      {"Which band played in 1975 in London in 1976?", true},
      {"What was founded in 1850 in London?", false},
      {"Who won the race in 1988?", true},
      {"How many people lived there in 1901?", true},
      {"Who won the 2000 election?", false},
      {"Who won it in 2001? Really", false},
      {"Who was elected in 1960?", true},
      {"Was it in 1960s?", false},
      {"Who won?", false},
  };
  std::vector<QaItem> items;
  std::size_t expected = 0;
  for (std::size_t i = 0; i < fixture.size(); ++i) {
    items.push_back(qa(std::to_string(i), fixture[i].first));
    expected += fixture[i].second ? 1 : 0;
  }
  ASSERT_EQ(expected, 8u);
  const auto kept = filter_year_ending(items);
  ASSERT_EQ(kept.size(), 8u);
  for (const auto& k : kept) EXPECT_TRUE(fixture[std::stoul(k.id)].second) << k.question;
  EXPECT_EQ(filter_year_ending(kept), kept);
}

TEST(Corpus, LongFormYearIsNormalized) {
  const auto kept = filter_year_ending({qa("a", "Who led the party in the year 1987?")});
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].question, "Who led the party in 1987?");
}

TEST(Corpus, MultipleYearsAreFlagged) {
  const auto kept = filter_year_ending({qa("a", "Which band played in 1975 in London in 1976?")});
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].year_ref->year, 1976);
  EXPECT_EQ(kept[0].meta.at("multiple_years"), "true");
}

TEST(Corpus, Sample) {
  std::vector<int> items(100);
  for (int i = 0; i < 100; ++i) items[i] = i;
  EXPECT_TRUE(sample(items, 0, 1).empty());
  EXPECT_EQ(sample(items, 10, 5), sample(items, 10, 5));
  const auto a = sample(items, 30, 1);
  const auto b = sample(items, 30, 2);
  EXPECT_NE(a, b);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_EQ(std::set<int>(a.begin(), a.end()).size(), 30u);
  EXPECT_THROW(sample(items, 101, 1), Error);
}

TEST(Corpus, RoundTripIsByteIdentical) {
  const std::string content =
      R"({"id":"q1","question":"Who won the cup in 1999?","gold_answers":["A","B"],"source":"archival_qa"}
{"id":"q2","question":"Who ran in 2004?","gold_answers":["C"],"source":"synthetic","meta":{"k":"v"}}
)";
  const auto once = to_jsonl(parse_qa_jsonl(content).records);
  EXPECT_EQ(once, content);
  EXPECT_EQ(to_jsonl(parse_qa_jsonl(once).records), once);

  const std::string events =
      R"({"id":"e1","description":"The Titanic sank","year":1912,"month":4,"day":15}
{"id":"e2","description":"A fair opened","year":1889,"month":5}
)";
  EXPECT_EQ(to_jsonl(parse_event_jsonl(events).records), events);
}

TEST(Corpus, ManifestLoadsAllKindsAndResolvesPaths) {
  const fs::path dir = temp_dir("manifest");
  write_text_file(dir / "qa.jsonl",
                  R"({"id":"q1","question":"Who won the cup in 1999?","gold_answers":["A"],"source":"synthetic"}
{"id":"q2","question":"Who won the 1999 cup?","gold_answers":["A"],"source":"synthetic"}
)");
  write_text_file(dir / "claims.jsonl", R"({"id":"c1","claim":"X","gold_label":"True"}
{"id":"c2","claim":"Y","gold_label":"Maybe"}
)");
  write_text_file(dir / "manifest.json", R"({"datasets":[
    {"kind":"qa","path":"qa.jsonl","filters":["year_ending"]},
    {"kind":"claim","path":"claims.jsonl"}]})");
  const Corpora c = load_corpora(load_manifest(dir / "manifest.json"));
  EXPECT_EQ(c.qa.size(), 1u);
  EXPECT_EQ(c.claims.size(), 1u);
  EXPECT_EQ(c.issues.size(), 1u);
}

TEST(Corpus, MissingManifestNamesThePath) {
  try {
    load_manifest("/no/such/manifest.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("/no/such/manifest.json"), std::string::npos);
  }
}

}  // namespace
}  // namespace chronoqa
