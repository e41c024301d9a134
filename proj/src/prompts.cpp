#include "tracewise/harness.hpp"

#include "tracewise/error.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace tracewise {

namespace {

constexpr const char* kClosing =
    "You cannot write code or use any external tools. You should only solve the {{noun}} problem and format the "
    "{{noun}} trace in natural language. \n"
    "You can think as long as you want, but you have to conclude your {{noun}} trace and final answer in the given "
    "format within <answer> and </answer> tags. \n";

constexpr const char* kCounting = R"(Problem description:
Given a sequence S and a target symbol t, scan S left-to-right and return how many times t appears. You should report the CHECK trace using the following format:

CHECK(i)==<current_count>;
...
END()==<total_count>

where <total_count> is the number of times the target symbol appears in the sequence S up to index i.

{{closing}}
Example:
Input: Sequence: '131', Target: '1'
Output:
<answer>
CHECK(0)==1;
CHECK(1)==1;
CHECK(2)==2;
END()==2
</answer>

Question:
{{question}}
)";

constexpr const char* kSliding = R"(Problem description:
Given an array of integers and a sliding window width k, compute the maximum value in each window as it moves from left to right.
You should report the search trace using the following format:

CHECK(<L>,<R>)==<max_value>;
...
END()==[<max_value0>,<max_value1>,...]

where CHECK(<L>,<R>)==<max_value> indicating search window from index L(inclusive) to R(exclusive), and found the maximum value <max_value>.

{{closing}}
Example:
Input: array = [2,7,4,3,6], window size = 3
Output:
<answer>
CHECK(0,3)==7;
CHECK(1,4)==7;
CHECK(2,5)==6;
END()==[7,7,6]
</answer>

Question:
{{question}}
)";

constexpr const char* kFlood = R"(Problem description:
Given a 2D binary grid where each cell is either '0' (water) or '1' (land), count the number of islands formed by 4-connected land cells.
You should report the search trace using the following format:

VISIT(r,c)==<island_id>;
...
END()==<island_count>

where VISIT(r,c)==<island_id> records that the land cell at row r and column c belongs to island <island_id>. Scan the grid row by row; when you meet an unvisited land cell, start a new island with the next id (starting from 1) and visit its whole island depth-first (up, down, left, right) before continuing the scan.

{{closing}}
Example:
Input:
110
010
001
Output:
<answer>
VISIT(0,0)==1;
VISIT(0,1)==1;
VISIT(1,1)==1;
VISIT(2,2)==2;
END()==2
</answer>

Question:
{{question}}
)";

constexpr const char* kEdit = R"(Problem description:
Given a source string and a target string, compute the minimum number of single-character insertions, deletions or substitutions required to transform the source into the target.
You should report the search trace using the following format:

CHECK(i,j)==<cost>;
...
END()==<distance>

where CHECK(i,j)==<cost> gives the edit distance between the first i characters of the source and the first j characters of the target. Fill every cell for i from 0 to the source length and j from 0 to the target length, row by row.

{{closing}}
Example:
Input: source = 'ab', target = 'b'
Output:
<answer>
CHECK(0,0)==0;
CHECK(0,1)==1;
CHECK(1,0)==1;
CHECK(1,1)==1;
CHECK(2,0)==2;
CHECK(2,1)==1;
END()==1
</answer>

Question:
{{question}}
)";

constexpr const char* kClustering = R"(Problem description:
Given every pair-wise distance between n labelled points, perform AGNES hierarchical clustering with the single linkage (minimum pair distance). Merge the two closest clusters repeatedly until only two clusters remain, then report those two clusters and the distance between them.
You should report the exploration trace (in this case, the whole trial-and-error history) using the following format:

CHECK(cluster_a,cluster_b)==d;
...
MERGE(cluster_u,cluster_v)=={new_cluster,...};
END()=={cluster_x,cluster_y,d}

where you should start each point in its own cluster, and repeatedly merge the two clusters whose closest pair of points are the nearest among all cluster pairs. The name of new cluster is the concatenation of the two merged clusters, sorted in alphabetical order.

{{closing}}
Example:
Input:
   | A | B  | C | D |
 A | - | 10 | 4 | 2 |
 B | - | -  | 6 | 5 |
 C | - | -  | - | 9 |
 D | - | -  | - | - |
Output:
<answer>
CHECK(A,B)==10;
CHECK(A,C)==4;
CHECK(A,D)==2;
CHECK(B,C)==6;
CHECK(B,D)==5;
CHECK(C,D)==9;
MERGE(A,D)=={{AD},B,C};
CHECK({AD},B)==5;
CHECK({AD},C)==4;
CHECK(B,C)==6;
MERGE({AD},C)=={{ACD},B};
END()=={{ACD},B,5}"
</answer>

Question:
{{question}}
)";

constexpr const char* kFactorization = R"(Problem description:
Given a number, generate the prime number factorization of it.
You should report the exploration trace (in this case, the whole trial-and-error history) using the following format:

STATE(remaining_number);
ATTEMPT(remaining_number,candidate_prime)==<True/False>;
...
Rules: Search with candidate prime factors using ATTEMPT(). Return True if it is a factor. You can shrink problem size with STATE() after you find a true factor. Start with STATE(input_number).

{{closing}}
Example:
Input: 44460
Output:
<answer>
STATE(44460);
ATTEMPT(44460,2)==True;
STATE(22230);
ATTEMPT(22230,2)==True;
STATE(11115);
ATTEMPT(11115,2)==False;
ATTEMPT(11115,3)==True;
STATE(3705);
ATTEMPT(3705,3)==True;
STATE(1235);
ATTEMPT(1235,3)==False;
ATTEMPT(1235,5)==True;
STATE(247);
ATTEMPT(247,5)==False;
ATTEMPT(247,7)==False;
ATTEMPT(247,11)==False;
ATTEMPT(247,13)==True;
STATE(19);
ATTEMPT(19,13)==False;
ATTEMPT(19,17)==False;
ATTEMPT(19,19)==True;
STATE(1);
END()==[2,2,3,3,5,13,19];
</answer>

Question:
{{question}}
)";

constexpr const char* kPermutation = R"(Problem description:
Given a list of integers which may contain duplicates, generate all unique permutations.
You should report the search trace using the following format:

CHECK(path)==continue;
CHECK(path)==done;
BACKTRACK(path);
END()

where path indicating a (partial) permutation. CHECK(path) for path containing all elements in the array should return done and otherwise (if not all elements are used) done. Only unique permutation should be returned, meaning that you should avoid repeated outputs by pruning duplicate branches during the exploration process.

{{closing}}
Example:
Input: Input: [1,3,1]
Output:
<answer>
CHECK([])==continue
CHECK([1])==continue
CHECK([1,1])==continue
CHECK([1,1,3])==done
BACKTRACK([1,1])
BACKTRACK([1])
CHECK([1,3])==continue
CHECK([1,3,1])==done
BACKTRACK([1,3])
BACKTRACK([1])
BACKTRACK([])
CHECK([3])==continue
CHECK([3,1])==continue
CHECK([3,1,1])==done
BACKTRACK([3,1])
BACKTRACK([3])
BACKTRACK([])
END()
</answer>

Question:
{{question}}
)";

constexpr const char* kGame24 = R"(Problem description:
Given four positive integers from 1 - 13, repetition allowed, using the operations +, -, * and / and as many pairs of parentheses as you like, form an arithmetic expression that evaluates exactly to 24. Every input number must be used once and only once; division is exact (fractional results are allowed during intermediate steps); you may not concatenate digits (e.g., 12 from 1 and 2). Output one expression that equals 24 plus a exploration trace to explain the process of your trials to find the final solution.
You should report the exploration trace (in this case, the whole trial-and-error history) using the following format:

ATTEMPT(candidate_expression)==<computed_result>;

{{closing}}
Example:
Input: Input: [4, 8, 8, 6]
Thinking: (Thinking and doing trial-and-error, and generate ATTEMPT records for each trial during thinking)...
Output:
<answer>
ATTEMPT((8-4)*(8-6))==8;
ATTEMPT(8/(8-6)*4)==16;
ATTEMPT(6/(8-4)*8)==12;
ATTEMPT(4*6*(8/8))==24;
END()==(4*6*(8/8));
</answer>

Question:
{{question}}
)";

std::string builtin_template(TaskKind kind) {
    switch (kind) {
    case TaskKind::CountingElements: return kCounting;
    case TaskKind::SlidingWindowMax: return kSliding;
    case TaskKind::FloodFill: return kFlood;
    case TaskKind::EditDistance: return kEdit;
    case TaskKind::HierarchicalClustering: return kClustering;
    case TaskKind::PrimeFactorization: return kFactorization;
    case TaskKind::PermutationWithDuplicates: return kPermutation;
    case TaskKind::Game24: return kGame24;
    }
    fail(ErrorCode::TemplateMissing, "no template for kind");
}

std::string closing_noun(TaskKind kind) {
    return kind == TaskKind::CountingElements || kind == TaskKind::HierarchicalClustering ? "CHECK" : "search";
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
    for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size())
        s.replace(pos, from.size(), to);
}

template <class T>
std::string join(const std::vector<T>& v, const char* sep) {
    std::ostringstream out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out << (i ? sep : "") << v[i];
    return out.str();
}

} // namespace

std::string render_distance_table(const ClusteringPayload& p) {
    const auto labels = p.labels();
    std::ostringstream out;
    char cell[32];
    out << "  |";
    for (char c : labels) {
        std::snprintf(cell, sizeof cell, "%2s |", std::string(1, c).c_str());
        out << cell;
    }
    out << "\n";
    for (int i = 0; i < p.points; ++i) {
        out << labels[static_cast<std::size_t>(i)] << " |";
        for (int j = 0; j < p.points; ++j) {
            const auto text = j > i ? std::to_string(p.distance[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
                                    : std::string("-");
            std::snprintf(cell, sizeof cell, "%2s |", text.c_str());
            out << cell;
        }
        out << "\n";
    }
    return out.str();
}

std::string render_question(const TaskInstance& instance) {
    switch (instance.kind) {
    case TaskKind::CountingElements: {
        const auto& p = instance.as<CountingPayload>();
        return "Sequence: '" + p.sequence + "', Target: '" + std::string(1, p.target) + "'";
    }
    case TaskKind::SlidingWindowMax: {
        const auto& p = instance.as<SlidingWindowPayload>();
        return "Input: array = [" + join(p.values, ",") + "], window size = " + std::to_string(p.window);
    }
    case TaskKind::FloodFill: {
        const auto& p = instance.as<FloodFillPayload>();
        return "Input:\n" + join(p.grid, "\n");
    }
    case TaskKind::EditDistance: {
        const auto& p = instance.as<EditDistancePayload>();
        return "Input: source = '" + p.source + "', target = '" + p.target + "'";
    }
    case TaskKind::HierarchicalClustering: {
        auto table = render_distance_table(instance.as<ClusteringPayload>());
        table.pop_back();
        return "Input:\n" + table;
    }
    case TaskKind::PrimeFactorization:
        return "Input: " + std::to_string(instance.as<FactorizationPayload>().n);
    case TaskKind::PermutationWithDuplicates:
        return "Input: [" + join(instance.as<PermutationPayload>().elements, ", ") + "]";
    case TaskKind::Game24: {
        const auto& c = instance.as<Game24Payload>().cards;
        return "Input: [" + join(std::vector<int>(c.begin(), c.end()), ", ") + "]";
    }
    }
    fail(ErrorCode::TemplateMissing, "no question renderer for kind");
}

std::string build_prompt(const TaskInstance& instance, const std::string& template_dir) {
    std::string tpl;
    if (template_dir.empty()) {
        tpl = builtin_template(instance.kind);
    } else {
        const auto path = std::filesystem::path(template_dir) / (std::string(to_string(instance.kind)) + ".txt");
        std::ifstream in(path, std::ios::binary);
        if (!in)
            fail(ErrorCode::TemplateMissing, "no template at " + path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        tpl = buf.str();
    }
    if (tpl.find("{{question}}") == std::string::npos)
        fail(ErrorCode::TemplateMissing, "template for " + std::string(to_string(instance.kind)) +
                                             " has no {{question}} slot");
    std::string closing = kClosing;
    replace_all(closing, "{{noun}}", closing_noun(instance.kind));
    replace_all(tpl, "{{closing}}", closing);
    replace_all(tpl, "{{question}}", render_question(instance));
    return tpl;
}

} // namespace tracewise
