import java.util.List;

public class Roster {
    private int[] scores;

    public Roster(int[] scores) {
        this.scores = scores;
    }

    /** Puts the scores in ascending order, shifting larger ones right. */
    public void arrangeScores() {
        for (int pos = 1; pos < scores.length; pos++) {
            int current = scores[pos];
            int back;
            for (back = pos - 1; back >= 0 && scores[back] > current; back--) {
                scores[back + 1] = scores[back];
            }
            scores[back + 1] = current;
        }
    }

    public int best() {
        int top = scores[0];
        for (int s : scores) {
            if (s > top) {
                top = s;
            }
        }
        return top;
    }
}
