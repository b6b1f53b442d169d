"""Hand-written SMT-LIB programs; together they exercise every rule in grammar.bnf."""

VALID = [
    "(check-sat)",
    "(assert true)",
    "(assert (> x 1))",
    "(set-logic QF_LIA)\n(declare-const x Int)\n(assert (< x 10))\n(check-sat)\n(get-model)",
    "(set-option :produce-models true)",
    "(set-option :print-success)",
    "(set-info :smt-lib-version 2.6)",
    "(set-info :status sat)",
    "(set-info :notes ())",
    "(set-info :source (a b 1 :k () (c #x1F)))",
    '(set-info :license "MIT")',
    "(declare-fun f () Int)",
    "(declare-fun g (Int Int) Bool)",
    "(declare-fun h (Int (Array Int Bool)) Real)",
    "(declare-sort U)",
    "(declare-sort Box 1)",
    "(define-fun five () Int 5)",
    "(define-fun add ((a Int) (b Int)) Int (+ a b))",
    "(define-sort Word () (_ BitVec 32))",
    "(define-sort Pair (X Y) (P X Y))",
    "(declare-datatype Color ((red) (green) (blue)))",
    "(declare-datatype Point ((mk-point (px Int) (py Int))))",
    "(declare-datatypes ((List 0) (Tree 0)) (((nil) (cons (hd Int) (tl List))) ((leaf) (node (val Int)))))",
    "(declare-datatypes () ((Color red green) (Pair (mk (fst Int) (snd Int)))))",
    "(declare-datatypes () ((Unit unit)))",
    "(get-value (x y (+ x y)))",
    "(get-value (x))",
    "(push)\n(pop)",
    "(push 1)\n(assert false)\n(pop 1)",
    '(echo "done")',
    "(exit)",
    "(reset)",
    "(get-info :name)",
    "(get-option :produce-models)",
    "(check-sat-assuming (p (not q)))",
    "(declare-const bv (_ BitVec 8))\n(assert (= bv #b10101010))",
    "(assert (= ((_ extract 7 0) y) #xFF))",
    "(declare-const a (_ Foo bar 2))",
    "(assert (= (as nil (List Int)) l))",
    "(assert (let ((y (+ x 1)) (z 2)) (> y z)))",
    "(assert (forall ((i Int) (j Int)) (=> (< i j) (< (f i) (f j)))))",
    "(assert (exists ((k Int)) (= (* 2 k) n)))",
    "(assert (! (> x 0) :named pos))",
    "(assert (! (f x) :pattern ((f x)) :weight 3))",
    "(assert (= s \"hello\"))",
    "(assert (< 0.5 r))",
    "(assert (and p (or q (not r)) (=> p q)))",
    "(assert (ite (> x 0) (= y 1) (= y 2)))",
    "; comment line\n(declare-const x Int) ; trailing\n(assert (>= x 0))\n(check-sat)",
    "(declare-const |weird name| Int)\n(assert (= |weird name| 3))",
    "(set-logic ALL)\n(declare-fun p () Bool)\n(declare-fun q () Bool)\n(assert (xor p q))\n(check-sat)\n(exit)",
    "(declare-const x Int)\n(declare-const y Int)\n(assert (distinct x y))\n(assert (= (+ x y) 10))\n(check-sat)\n(get-value (x y))",
    "(declare-fun arr () (Array Int Int))\n(assert (= (select (store arr 1 2) 1) 2))\n(check-sat)",
    "(define-fun abs ((v Int)) Int (ite (>= v 0) v (- v)))\n(assert (= (abs (- 3)) 3))",
    "(declare-const r Real)\n(assert (and (> r 0.0) (< r 1.0)))\n(check-sat)",
    "(assert (forall ((x Int)) (exists ((y Int)) (> y x))))",
    "(assert (let ((a 1)) (let ((b a)) (= a b))))",
    "(push 2)\n(pop 2)\n(check-sat)",
]

MALFORMED = [
    "( )",
    "(assert (> x 1)",
    "(assert)",
    "(declare-const x)",
    "(check-sat",
    ")",
    "(assert (let () x))",
    "(declare-fun f (Int))",
    "(push 1 2)",
    "(assert (forall (x Int) x))",
]
