"""Independent numpy reference for the greedy single-stage compression plan
on a fixed great-circle path of lines in R^5. Prints the frozen table used in
test_compression.cpp."""
import numpy as np

N, K = 30, 20


def path_directions(n):
    a = np.array([1.0, 0.0, 0.0, 0.0, 0.0])
    b = np.array([0.0, 1.0, 1.0, 0.0, 1.0]) / np.sqrt(3.0)
    i = np.arange(n)
    t = 0.05 * i + 0.01 * np.sin(1.7 * i)
    return [np.cos(ti) * a + np.sin(ti) * b for ti in t]


def dist(u, v):
    P = np.outer(u, u) - np.outer(v, v)
    return np.linalg.norm(P, 2)


def greedy(dirs, k):
    n = len(dirs)
    D = np.array([[dist(u, v) for v in dirs] for u in dirs])
    removed, marked = set(), set()
    missing, neighbors = [], []
    order = list(range(n))
    while len(missing) < n - k:
        cand = [i for i in order if i not in removed and i not in marked]
        avail = [j for j in range(n) if j not in removed]
        feas, infeas = [], []
        for i in cand:
            others = [j for j in avail if j != i]
            if not others:
                infeas.append(i)
                continue
            l1 = min(others, key=lambda j: (D[i, j], j))
            second = [j for j in others if j != l1 and D[i, j] <= D[j, l1]]
            if not second:
                infeas.append(i)
                continue
            l2 = min(second, key=lambda j: (D[i, j], j))
            feas.append((D[i, l1] + D[i, l2], i, l1, l2))
        feas.sort(key=lambda c: (c[0], c[1]))
        took = 0
        for total, i, l1, l2 in feas:
            if len(missing) >= n - k:
                break
            if i in removed or i in marked or l1 in removed or l2 in removed:
                continue
            removed.add(i)
            marked.update((l1, l2))
            missing.append(i)
            neighbors.append((l1, l2))
            took += 1
        order = [c[1] for c in feas] + infeas
        if took == 0:
            break
    return missing, neighbors


if __name__ == "__main__":
    m, L = greedy(path_directions(N), K)
    print("missing", m)
    print("neighbors", L)
    # bisector of e1 and (e1 + e2)/sqrt(2)
    e1 = np.array([1.0, 0.0, 0.0])
    v = np.array([1.0, 1.0, 0.0]) / np.sqrt(2.0)
    s = (e1 + v) / np.linalg.norm(e1 + v)
    print("bisector dist %.16f %.16f" % (dist(s, e1), dist(s, v)))
    print("bound theta=0.1 G=2 var=1/3: %.16e" % (4.0 / 3.0 * (2.0 - 2.0 * np.cos(0.1))))
    print("dist e1 vs (e1+e2)/sqrt2: %.16f" % dist(e1, v))
