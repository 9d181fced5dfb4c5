#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "unml/csv.hpp"
#include "unml/error.hpp"

namespace unml::csv {
namespace {

TEST(Csv, ParsesPlainRows) {
  std::istringstream in("1,2\n3.5,-4e-3\n");
  const auto d = read_dataset(in);
  ASSERT_EQ(d.n(), 2);
  ASSERT_EQ(d.m(), 2);
  EXPECT_EQ(d.rows()(1, 0), 3.5);
  EXPECT_EQ(d.rows()(1, 1), -4e-3);
}

TEST(Csv, HeaderQuotesCrlfAndBlankLines) {
  std::istringstream in("x,y\r\n\"1\", +2 \r\n\r\n 3 ,\"4\"\r\n");
  const auto d = read_dataset(in, {.header = true});
  ASSERT_EQ(d.n(), 2);
  EXPECT_EQ(d.rows()(0, 1), 2.0);
  EXPECT_EQ(d.rows()(1, 0), 3.0);
}

TEST(Csv, RejectsMalformedInput) {
  const auto fails = [](const char* text) {
    std::istringstream in(text);
    try {
      read_dataset(in);
    } catch (const Error& e) {
      return e.code() == Errc::invalid_input;
    }
    return false;
  };
  EXPECT_TRUE(fails(""));
  EXPECT_TRUE(fails("1,2\n3\n"));
  EXPECT_TRUE(fails("1,abc\n"));
  EXPECT_TRUE(fails("1,\n"));
  EXPECT_TRUE(fails("nan\n"));
  EXPECT_TRUE(fails("inf\n"));
  EXPECT_TRUE(fails("\"1\n"));
  EXPECT_TRUE(fails("1e999\n"));
}

TEST(Csv, ErrorNamesTheLine) {
  std::istringstream in("1\n2\nx\n");
  try {
    read_dataset(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Csv, ReadColumn) {
  std::istringstream in("theta\n0.5\n-1\n");
  const auto col = read_column(in, {.header = true});
  ASSERT_EQ(col.size(), 2u);
  EXPECT_EQ(col[1], -1.0);
  std::istringstream wide("1,2\n");
  EXPECT_THROW(read_column(wide), Error);
}

TEST(Csv, WriteReadRoundTripIsExact) {
  const auto d = test::random_dataset(50, 3, 11);
  std::ostringstream out;
  write_dataset(out, d);
  std::istringstream in(out.str());
  EXPECT_EQ(read_dataset(in).rows(), d.rows());
}

TEST(Csv, FormatDoubleShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-2.0), "-2");
  EXPECT_EQ(format_double(1e-300), "1e-300");
  const double tiny = std::numeric_limits<double>::denorm_min();
  std::istringstream in(format_double(tiny) + "\n");
  EXPECT_EQ(read_column(in)[0], tiny);
}

}  // namespace
}  // namespace unml::csv
