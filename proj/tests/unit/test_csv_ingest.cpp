#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "raresub/csv.hpp"
#include "raresub/error.hpp"
#include "raresub/ingest.hpp"
#include "raresub/rng.hpp"

using namespace raresub;
namespace fs = std::filesystem;

namespace {

// scratch dir per test binary run
fs::path scratch() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "raresub_ingest_tests";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("csv parser handles quoting and newlines") {
    const csv::Table t = csv::parse("a,\"b,c\",\"say \"\"hi\"\"\"\r\n1,2,3\n");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][1] == "b,c");
    CHECK(t.rows[0][2] == "say \"hi\"");
    CHECK(t.rows[1][0] == "1");
    CHECK_THROWS_AS(csv::parse("a,\"unterminated\n"), Error);
}

TEST_CASE("csv double formatting round-trips exactly") {
    Pcg32 rng(5);
    for (int i = 0; i < 1000; ++i) {
        double v = (rng.next_double() - 0.5) * std::pow(10.0, double(rng.next_below(12)) - 6.0);
        const std::string text = csv::format_double(v);
        CHECK(csv::parse_double(text, 0, 0) == v);
    }
}

TEST_CASE("load_matrix inner join keeps data-file order") {
    write(scratch() / "d.csv", ",g1,g2\ns1,1,2\ns2,3,4\ns3,5,6\n");
    write(scratch() / "l.csv", ",Class\ns3,B\ns2,A\nsX,C\n");
    LoadReport report;
    const ExpressionMatrix m = ingest::load_matrix((scratch() / "d.csv").string(),
                                                   (scratch() / "l.csv").string(), &report);
    REQUIRE(m.n_samples() == 2);
    CHECK(m.sample_ids[0] == "s2");  // data order, not labels order
    CHECK(m.sample_ids[1] == "s3");
    CHECK(m.class_labels[0] == "A");
    CHECK(m.values(0, 0) == 3.0);
    CHECK(report.dropped_data_only == 1);   // s1
    CHECK(report.dropped_labels_only == 1); // sX
    CHECK(report.class_counts.at("A") == 1);
}

TEST_CASE("load_matrix error paths") {
    write(scratch() / "ok_l.csv", ",Class\ns1,A\n");
    write(scratch() / "ok_d.csv", ",g1\ns1,1\n");

    CHECK_THROWS_WITH_AS(
        ingest::load_matrix((scratch() / "missing.csv").string(), (scratch() / "ok_l.csv").string()),
        doctest::Contains("MissingFile"), Error);

    write(scratch() / "badhdr.csv", "sample,g1\ns1,1\n");
    CHECK_THROWS_WITH_AS(ingest::load_matrix((scratch() / "badhdr.csv").string(),
                                             (scratch() / "ok_l.csv").string()),
                         doctest::Contains("MalformedHeader"), Error);

    write(scratch() / "nonnum.csv", ",g1\ns1,abc\n");
    CHECK_THROWS_WITH_AS(ingest::load_matrix((scratch() / "nonnum.csv").string(),
                                             (scratch() / "ok_l.csv").string()),
                         doctest::Contains("NonNumericCell"), Error);

    write(scratch() / "dup.csv", ",g1\ns1,1\ns1,2\n");
    CHECK_THROWS_WITH_AS(
        ingest::load_matrix((scratch() / "dup.csv").string(), (scratch() / "ok_l.csv").string()),
        doctest::Contains("DuplicateSampleId"), Error);

    write(scratch() / "dupgene.csv", ",g1,g1\ns1,1,2\n");
    CHECK_THROWS_WITH_AS(ingest::load_matrix((scratch() / "dupgene.csv").string(),
                                             (scratch() / "ok_l.csv").string()),
                         doctest::Contains("DuplicateGeneId"), Error);

    write(scratch() / "nolap_l.csv", ",Class\nzz,A\n");
    CHECK_THROWS_WITH_AS(ingest::load_matrix((scratch() / "ok_d.csv").string(),
                                             (scratch() / "nolap_l.csv").string()),
                         doctest::Contains("EmptyJoin"), Error);

    write(scratch() / "noclass_l.csv", ",Label\ns1,A\n");
    CHECK_THROWS_WITH_AS(ingest::load_matrix((scratch() / "ok_d.csv").string(),
                                             (scratch() / "noclass_l.csv").string()),
                         doctest::Contains("Class"), Error);
}

TEST_CASE("id header may be blank or 'id'") {
    write(scratch() / "id_d.csv", "id,g1\ns1,7\n");
    write(scratch() / "id_l.csv", "id,Class\ns1,A\n");
    const ExpressionMatrix m =
        ingest::load_matrix((scratch() / "id_d.csv").string(), (scratch() / "id_l.csv").string());
    CHECK(m.values(0, 0) == 7.0);
}

TEST_CASE("filter_class") {
    ExpressionMatrix m;
    m.sample_ids = {"a", "b", "c", "d", "e"};
    m.gene_ids = {"g1", "g2"};
    m.class_labels = {"A", "A", "B", "B", "B"};
    m.values.resize(5, 2);
    for (int i = 0; i < 5; ++i) {
        m.values(i, 0) = i;
        m.values(i, 1) = 10 + i;
    }

    const ExpressionMatrix b = ingest::filter_class(m, "B");
    REQUIRE(b.n_samples() == 3);
    CHECK(b.sample_ids == std::vector<std::string>{"c", "d", "e"});
    CHECK(b.values(0, 0) == 2.0);
    CHECK(b.n_genes() == 2);

    // filtering on the only class present returns an identical matrix
    ExpressionMatrix all_a = m;
    all_a.class_labels = {"A", "A", "A", "A", "A"};
    const ExpressionMatrix same = ingest::filter_class(all_a, "A");
    CHECK(same.sample_ids == all_a.sample_ids);
    CHECK(same.values == all_a.values);

    CHECK_THROWS_WITH_AS(ingest::filter_class(m, "Z"), doctest::Contains("UnknownClass"), Error);
}

TEST_CASE("validate counts violations without mutating") {
    ExpressionMatrix m;
    m.sample_ids = {"a", "b"};
    m.gene_ids = {"g1", "g2"};
    m.values.resize(2, 2);
    m.values << 1.0, 2.0, 3.0, 4.0;
    CHECK(ingest::validate(m).clean());

    m.values(0, 1) = std::nan("");
    CHECK(ingest::validate(m).nan_count == 1);
    m.values(0, 1) = -1.0;
    ValidationSummary s = ingest::validate(m);
    CHECK(s.nan_count == 0);
    CHECK(s.negative_count == 1);
    m.values(1, 0) = std::numeric_limits<double>::infinity();
    CHECK(ingest::validate(m).inf_count == 1);
}

TEST_CASE("save then load reproduces values bit-identically") {
    Pcg32 rng(77);
    ExpressionMatrix m;
    m.sample_ids = {"s1", "s2", "s3"};
    m.gene_ids = {"g1", "g2", "g3", "g4"};
    m.class_labels = {"X", "Y", "X"};
    m.values.resize(3, 4);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 4; ++j) {
            m.values(i, j) = rng.next_double() * 1e4;
        }
    }
    const std::string d = (scratch() / "rt_d.csv").string();
    const std::string l = (scratch() / "rt_l.csv").string();
    ingest::save_matrix(m, d, l);
    const ExpressionMatrix back = ingest::load_matrix(d, l);
    REQUIRE(back.n_samples() == 3);
    REQUIRE(back.n_genes() == 4);
    CHECK(back.values == m.values);  // exact
    CHECK(back.sample_ids == m.sample_ids);
    CHECK(back.gene_ids == m.gene_ids);
    CHECK(back.class_labels == m.class_labels);
}

TEST_CASE("join output ids are a subset of the data file ids") {
    Pcg32 rng(99);
    std::string data = ",g1\n";
    std::string labels = ",Class\n";
    std::vector<std::string> data_ids;
    for (int i = 0; i < 20; ++i) {
        const std::string id = "s" + std::to_string(i);
        if (rng.next_double() < 0.7) {
            data += id + "," + std::to_string(i) + "\n";
            data_ids.push_back(id);
        }
        if (rng.next_double() < 0.7) {
            labels += id + ",C\n";
        }
    }
    write(scratch() / "sub_d.csv", data);
    write(scratch() / "sub_l.csv", labels);
    const ExpressionMatrix m =
        ingest::load_matrix((scratch() / "sub_d.csv").string(), (scratch() / "sub_l.csv").string());
    for (const auto& id : m.sample_ids) {
        CHECK(std::find(data_ids.begin(), data_ids.end(), id) != data_ids.end());
    }
}
